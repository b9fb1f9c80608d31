"""Instance and solution files.

Both are UTF-8 JSON documents with a ``format`` name and a ``version``
header around the pydantic model. Floats are written in Python's shortest
round-trip form, so re-reading a file gives back bit-identical values.
Documents are checked against the JSON schema of their envelope before they
are parsed; every schema error is reported at once.
"""
import json
import logging
from pathlib import Path
from typing import Literal, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from models import FileValidator
from models.instance import Instance
from models.solution import Solution

logger = logging.getLogger(__name__)


INSTANCE_FORMAT = "itlp-instance"
SOLUTION_FORMAT = "itlp-solution"
FORMAT_VERSION = 1


class InstanceFileError(Exception):
    """Raised when an instance or solution file cannot be read or written."""
    pass


class InstanceDocument(BaseModel):
    format: Literal["itlp-instance"] = INSTANCE_FORMAT
    version: Literal[1] = FORMAT_VERSION
    instance: Instance


class SolutionDocument(BaseModel):
    format: Literal["itlp-solution"] = SOLUTION_FORMAT
    version: Literal[1] = FORMAT_VERSION
    solution: Solution


Document = TypeVar("Document", InstanceDocument, SolutionDocument)


def _render(document: BaseModel) -> str:
    return document.model_dump_json(indent=2) + "\n"


def _parse(text: str, document_cls: Type[Document], source: str) -> Document:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceFileError(f"{source}: not valid JSON ({e})") from e
    if not isinstance(data, dict):
        raise InstanceFileError(f"{source}: expected a JSON object")

    expected = document_cls.model_fields["format"].default
    if data.get("format") != expected:
        raise InstanceFileError(f"{source}: format is {data.get('format')!r}, expected {expected!r}")
    if data.get("version") != FORMAT_VERSION:
        raise InstanceFileError(f"{source}: unsupported version {data.get('version')!r}")

    errors = FileValidator(document_cls).validate(data)
    if errors:
        raise InstanceFileError(f"{source}: schema validation failed:\n  " + "\n  ".join(errors))
    try:
        return document_cls.model_validate(data)
    except ValidationError as e:
        raise InstanceFileError(f"{source}: {e}") from e


def instance_to_text(instance: Instance) -> str:
    return _render(InstanceDocument(instance=instance))


def instance_from_text(text: str, source: str = "<text>") -> Instance:
    return _parse(text, InstanceDocument, source).instance


def solution_to_text(solution: Solution) -> str:
    return _render(SolutionDocument(solution=solution))


def solution_from_text(text: str, source: str = "<text>") -> Solution:
    return _parse(text, SolutionDocument, source).solution


def _read(path: Union[str, Path]) -> str:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    except OSError as e:
        raise InstanceFileError(f"cannot read {path}: {e}") from e


def _write(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise InstanceFileError(f"cannot write {path}: {e}") from e
    return path


def read_instance(path: Union[str, Path]) -> Instance:
    """Load and validate an instance file.

    Raises:
        InstanceFileError: If the file is unreadable, malformed or fails the schema
    """
    instance = instance_from_text(_read(path), str(path))
    logger.info(f"Loaded instance {instance.name or path} (n={instance.n}, p={instance.p})")
    return instance


def write_instance(instance: Instance, path: Union[str, Path]) -> Path:
    written = _write(path, instance_to_text(instance))
    logger.info(f"Wrote instance to {written}")
    return written


def read_solution(path: Union[str, Path]) -> Solution:
    """Load and validate a solution file.

    Raises:
        InstanceFileError: If the file is unreadable, malformed or fails the schema
    """
    return solution_from_text(_read(path), str(path))


def write_solution(solution: Solution, path: Union[str, Path]) -> Path:
    written = _write(path, solution_to_text(solution))
    logger.info(f"Wrote solution to {written}")
    return written
