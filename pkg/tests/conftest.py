"""Test configuration and shared fixtures."""
import logging
import tempfile
from pathlib import Path
from typing import Callable, Generator, Sequence

import pytest

from generators import GenSpec, generate
from models.instance import Instance

# Configure test logging
logging.basicConfig(level=logging.DEBUG)


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Provide a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as temp_dir:
        yield Path(temp_dir)


def _two_site_instance(capacity: Sequence[float] = (100.0, 100.0),
                       fixed_cost: Sequence[float] = (10.0, 10.0)) -> Instance:
    """Two customers, two sites, 10 units from customer 0 to customer 1.

    Unit costs of the pair (0, 1): road 100, via link 0->1 22, through a
    single terminal 51, via link 1->0 120.
    """
    return Instance(
        name="toy",
        demand=[[0.0, 10.0], [0.0, 0.0]],
        fixed_cost=list(fixed_cost),
        capacity=list(capacity),
        alpha=0.5,
        road_cost=[[0.0, 100.0], [100.0, 0.0]],
        access_cost=[[1.0, 50.0], [50.0, 1.0]],
        inter_cost=[[0.0, 40.0], [40.0, 0.0]],
    )


@pytest.fixture
def toy_instance() -> Instance:
    """Hand-checkable 2 x 2 instance (see _two_site_instance)."""
    return _two_site_instance()


@pytest.fixture
def make_toy() -> Callable[..., Instance]:
    """Factory for variants of the toy instance with other capacities or fixed costs."""
    return _two_site_instance


@pytest.fixture
def coordinate_instance() -> Instance:
    """Small Euclidean instance from the generator."""
    return generate(GenSpec(n=4, p=3, seed=7))


@pytest.fixture
def small_instances() -> Callable[[int], list]:
    """Factory for a list of seeded small Euclidean instances."""
    def build(count: int, n_values=(2, 3, 4), p_values=(2, 3)) -> list:
        instances = []
        for seed in range(count):
            n = n_values[seed % len(n_values)]
            p = p_values[(seed // len(n_values)) % len(p_values)]
            instances.append(generate(GenSpec(n=n, p=p, seed=100 + seed)))
        return instances
    return build
