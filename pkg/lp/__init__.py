"""Linear programming engine."""
from .basis import REFACTOR_EVERY, BasisFactor, LpNumericalError
from .problem import (
    DEFAULT_ITER_LIMIT, DEFAULT_TOLERANCES, LpProblem, LpSolution, LpStatus, LpTolerances,
    to_lp_problem,
)
from .simplex import STALL_THRESHOLD, BoundedPrimalSimplex, solve_lp

__all__ = [
    "BasisFactor", "BoundedPrimalSimplex", "DEFAULT_ITER_LIMIT", "DEFAULT_TOLERANCES",
    "LpNumericalError", "LpProblem", "LpSolution", "LpStatus", "LpTolerances", "REFACTOR_EVERY",
    "STALL_THRESHOLD", "solve_lp", "to_lp_problem",
]
