"""Instance and solution file formats."""
from .files import (
    FORMAT_VERSION, INSTANCE_FORMAT, SOLUTION_FORMAT, InstanceDocument, InstanceFileError,
    SolutionDocument, instance_from_text, instance_to_text, read_instance, read_solution,
    solution_from_text, solution_to_text, write_instance, write_solution,
)

__all__ = [
    "FORMAT_VERSION", "INSTANCE_FORMAT", "SOLUTION_FORMAT", "InstanceDocument", "InstanceFileError",
    "SolutionDocument", "instance_from_text", "instance_to_text", "read_instance", "read_solution",
    "solution_from_text", "solution_to_text", "write_instance", "write_solution",
]
