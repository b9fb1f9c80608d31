"""MIP formulation of the four model variants."""
from .builders import (
    build_base, build_handling, build_min_links, build_model, build_pl, link_cost_coefficients,
    site_cost_coefficients,
)
from .fixing import ConfigurationError, configuration_vector, fix_configuration
from .model import EquationTag, MipModel, ModelBuilder, Relation, VarRole, empty_infeasible_model
from .stats import ModelStats, model_stats, closed_form_counts

__all__ = [
    "ConfigurationError", "EquationTag", "MipModel", "ModelBuilder", "ModelStats", "Relation",
    "VarRole", "build_base", "build_handling", "build_min_links", "build_model", "build_pl",
    "configuration_vector", "empty_infeasible_model", "fix_configuration",
    "link_cost_coefficients", "model_stats", "closed_form_counts", "site_cost_coefficients",
]
