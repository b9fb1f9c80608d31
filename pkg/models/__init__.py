"""Model utilities and validation helpers."""
from typing import Any, Dict, List, Type

import jsonschema
from pydantic import BaseModel

from .instance import (
    CostArrays, DEFAULT_ALPHA, Instance, LinkMode, Point, ValidationReport, VariantError,
    VariantKind, VariantSpec, build_costs_from_coordinates, intermodal_unit_cost,
    validate_instance,
)
from .solution import (
    BnbParams, Configuration, CostBreakdown, Engine, FeasibilityReport, FlowEntry,
    HeuristicParams, InfeasibilityKind, Neighborhood, RoadFlow, Solution, SolveMetadata,
    SolveStatus, TracePoint,
)


def generate_schema(model_cls: Type[BaseModel]) -> Dict[str, Any]:
    """Generate the JSON schema of a model class.

    Returns:
        JSON schema dictionary
    """
    return model_cls.model_json_schema()


class FileValidator:
    """JSON schema validator for documents of one model class."""

    def __init__(self, model_cls: Type[BaseModel]):
        self.model_cls = model_cls
        self.schema = generate_schema(model_cls)
        self.validator = jsonschema.Draft7Validator(self.schema)

    def validate(self, data: Dict[str, Any]) -> List[str]:
        """Validate data against the schema.

        Args:
            data: Dictionary to validate

        Returns:
            List of validation errors (empty if valid)
        """
        errors = []
        for error in sorted(self.validator.iter_errors(data), key=lambda e: [str(p) for p in e.path]):
            location = ".".join(str(p) for p in error.path) or "<root>"
            errors.append(f"{location}: {error.message}")
        return errors

    def is_valid(self, data: Dict[str, Any]) -> bool:
        return len(self.validate(data)) == 0


__all__ = [
    "BnbParams", "Configuration", "CostArrays", "CostBreakdown", "DEFAULT_ALPHA", "Engine",
    "FeasibilityReport", "FileValidator", "FlowEntry", "HeuristicParams", "InfeasibilityKind",
    "Instance", "LinkMode", "Neighborhood", "Point", "RoadFlow", "Solution", "SolveMetadata",
    "SolveStatus", "TracePoint", "ValidationReport", "VariantError", "VariantKind", "VariantSpec",
    "build_costs_from_coordinates", "generate_schema", "intermodal_unit_cost",
    "validate_instance",
]
