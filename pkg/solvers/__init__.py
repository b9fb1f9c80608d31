"""Exact, enumeration and heuristic solvers."""
from .checker import check_solution
from .evaluation import ConfigurationEvaluator, compute_breakdown, evaluate_configuration
from .exact import BranchAndBoundSolver, NodeRecord, solve_bnb
from .heuristic import HeuristicError, greedy_construct, local_search, solve_heuristic
from .oracle import ENUMERATION_CAP, EnumerationCapError, brute_force, enumerate_configurations
from .repair import RepairError, repair_configuration

__all__ = [
    "BranchAndBoundSolver", "ConfigurationEvaluator", "ENUMERATION_CAP", "EnumerationCapError",
    "HeuristicError", "NodeRecord", "RepairError", "brute_force", "check_solution", "compute_breakdown",
    "enumerate_configurations", "evaluate_configuration", "greedy_construct", "local_search",
    "repair_configuration", "solve_bnb", "solve_heuristic",
]
