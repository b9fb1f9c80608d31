from setuptools import setup, find_packages

setup(
    name="itlp-solver",
    version="0.1.0",
    description="Incomplete intermodal terminal location: generator, exact and heuristic solvers",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=["bench", "reporting"],
    package_data={"generators": ["templates/*.j2"]},
    python_requires=">=3.8",
    install_requires=[
        "pydantic>=2.0.0",
        "click>=8.0.0",
        "jinja2>=3.1.0",
        "pyyaml>=6.0",
        "jsonschema>=4.0.0",
        "numpy>=1.22",
        "scipy>=1.8",
    ],
    extras_require={
        "dev": ["pytest>=7.0"],
    },
    entry_points={
        "console_scripts": [
            "itlp=cli.main:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
)
