"""LP-based branch-and-bound over the binary z variables.

Each node solves the LP relaxation from scratch with its z fixings applied
as bounds. Until the first incumbent exists nodes are explored depth-first,
preferred child (nearest rounding) first; afterwards the open node with the
lowest bound is processed next, ties to the oldest node.
"""
import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from formulation import MipModel, build_model
from lp import DEFAULT_TOLERANCES, LpProblem, LpStatus, LpTolerances, solve_lp, to_lp_problem
from models.instance import Instance, VariantSpec
from models.solution import BnbParams, Configuration, Engine, InfeasibilityKind, Solution, SolveStatus
from .evaluation import ConfigurationEvaluator, infeasible_solution, is_better
from .repair import RepairError, repair_configuration

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NodeRecord:
    """A processed node: its LP bound under its fixings (column -> 0/1)."""
    node_id: int
    depth: int
    bound: float
    fixings: Dict[int, int]


@dataclass
class _Node:
    node_id: int
    depth: int
    estimate: float
    fixings: Dict[int, int] = field(default_factory=dict)


class BranchAndBoundSolver:
    """Exact solver for one instance and variant."""

    def __init__(self, instance: Instance, variant: VariantSpec, params: Optional[BnbParams] = None,
                 tol: LpTolerances = DEFAULT_TOLERANCES):
        self.instance = instance
        self.variant = variant
        self.params = params or BnbParams()
        self.tol = tol
        self.node_log: List[NodeRecord] = []
        self.model: Optional[MipModel] = None
        self.incumbent: Optional[Solution] = None
        self.node_lps = 0
        self.next_id = 0
        self.unproven = False
        self.gap_pruned_bound = float("inf")
        self.evaluator = ConfigurationEvaluator(instance, variant, tol)

    # ------------------------------------------------------------------
    def _cutoff(self) -> float:
        if self.incumbent is None:
            return float("inf")
        inc = self.incumbent.objective
        return inc - max(1e-9 * max(1.0, abs(inc)), self.params.relative_gap * abs(inc))

    def _prune(self, bound: float) -> bool:
        if bound < self._cutoff():
            return False
        if self.incumbent is not None and bound < self.incumbent.objective:
            self.gap_pruned_bound = min(self.gap_pruned_bound, bound)
        return True

    def _new_node(self, depth: int, estimate: float, fixings: Dict[int, int]) -> _Node:
        node = _Node(self.next_id, depth, estimate, fixings)
        self.next_id += 1
        return node

    def _offer(self, config: Configuration) -> None:
        solution = self.evaluator.evaluate(config)
        if solution.objective is None:
            return
        if is_better(solution.objective, config, self.incumbent):
            self.incumbent = solution
            logger.info(f"New incumbent {solution.objective:.6f} at {config.key()}")

    def _configuration_from(self, z: Dict[Tuple[int, int], float], threshold: float) -> Tuple[List[int], List[Tuple[int, int]]]:
        terminals = [k for (k, m), value in z.items() if k == m and value >= threshold]
        links = [(k, m) for (k, m), value in z.items() if k != m and value >= threshold]
        return terminals, links

    def _rounding_heuristic(self, z: Dict[Tuple[int, int], float]) -> None:
        terminals, links = self._configuration_from(z, 0.5)
        terminal_score = {k: value for (k, m), value in z.items() if k == m}
        link_score = {(k, m): value for (k, m), value in z.items() if k != m}
        try:
            config = repair_configuration(self.instance.p, self.variant, terminals, links,
                                          terminal_score, link_score)
        except RepairError as e:
            logger.debug(f"Rounding repair failed: {e}")
            return
        self._offer(config)

    def _branch_column(self, lp_z: np.ndarray, columns: List[int]) -> Optional[int]:
        """Most fractional z; ties to the larger objective coefficient, then lowest column."""
        best = None
        best_key = None
        for value, col in zip(lp_z, columns):
            frac = abs(value - round(value))
            if frac <= self.params.integrality_tol:
                continue
            key = (-min(value - np.floor(value), np.ceil(value) - value), -self.model.objective[col], col)
            if best_key is None or key < best_key:
                best, best_key = col, key
        return best

    def _solve_node(self, base: LpProblem, node: _Node, deadline: float):
        lower = base.lower.copy()
        upper = base.upper.copy()
        for col, value in node.fixings.items():
            lower[col] = upper[col] = float(value)
        problem = LpProblem(
            matrix=base.matrix, relations=base.relations, rhs=base.rhs,
            lower=lower, upper=upper, objective=base.objective, offset=base.offset,
        )
        self.node_lps += 1
        return solve_lp(problem, self.tol, deadline=deadline)

    # ------------------------------------------------------------------
    def solve(self) -> Solution:
        started = time.perf_counter()
        deadline = started + self.params.time_limit
        self.evaluator.deadline = deadline
        self.variant.check_against(self.instance)
        self.model = build_model(self.instance, self.variant)
        if self.model.structurally_infeasible:
            return infeasible_solution(self.instance, self.variant, Engine.EXACT, InfeasibilityKind.STRUCTURAL,
                                       self.model.infeasibility_reason, wall_time=time.perf_counter() - started)
        if time.perf_counter() >= deadline:
            return self._finish(started, 0, "time limit", False, [], [])

        base = to_lp_problem(self.model)
        if time.perf_counter() >= deadline:
            return self._finish(started, 0, "time limit", False, [], [])
        z_columns = self.model.z_columns()
        z_keys = {col: key for key, col in self.model.z_index.items()}

        stack: List[_Node] = [self._new_node(0, -float("inf"), {})]
        heap: List[Tuple[float, int, _Node]] = []
        root_infeasible = False
        limit_hit = None
        nodes = 0

        while stack or heap:
            if time.perf_counter() >= deadline:
                limit_hit = "time limit"
                break
            if nodes >= self.params.node_limit:
                limit_hit = "node limit"
                break

            if self.incumbent is not None and stack:
                for pending in stack:
                    heapq.heappush(heap, (pending.estimate, pending.node_id, pending))
                stack = []
            node = stack.pop() if stack else heapq.heappop(heap)[2]
            if self._prune(node.estimate):
                continue

            nodes += 1
            result = self._solve_node(base, node, deadline)
            if result.status == LpStatus.TIME_LIMIT:
                nodes -= 1
                stack.append(node)
                limit_hit = "time limit"
                break
            if result.status == LpStatus.INFEASIBLE:
                if node.node_id == 0:
                    root_infeasible = True
                continue
            if result.status != LpStatus.OPTIMAL:
                logger.warning(f"Node {node.node_id} LP ended {result.status.value}; subtree dropped")
                self.unproven = True
                continue

            bound = result.objective
            self.node_log.append(NodeRecord(node.node_id, node.depth, bound, dict(node.fixings)))
            logger.debug(f"Node {node.node_id} depth {node.depth} bound {bound:.6f}")
            if self._prune(bound):
                continue

            lp_z = result.x[z_columns]
            z_values = {z_keys[col]: float(value) for col, value in zip(z_columns, lp_z)}
            col = self._branch_column(lp_z, z_columns)
            if col is None:
                terminals, links = self._configuration_from(z_values, 0.5)
                self._offer(Configuration.of(terminals, links))
                continue

            if self.params.incumbent_heuristic:
                self._rounding_heuristic(z_values)
                if self._prune(bound):
                    continue

            value = z_values[z_keys[col]]
            preferred = 1 if value >= 0.5 else 0
            children = [
                self._new_node(node.depth + 1, bound, {**node.fixings, col: 1 - preferred}),
                self._new_node(node.depth + 1, bound, {**node.fixings, col: preferred}),
            ]
            if self.incumbent is None:
                stack.extend(children)
            else:
                for child in children:
                    heapq.heappush(heap, (child.estimate, child.node_id, child))

        return self._finish(started, nodes, limit_hit, root_infeasible, stack, heap)

    def _finish(self, started, nodes, limit_hit, root_infeasible, stack, heap) -> Solution:
        elapsed = time.perf_counter() - started
        lp_count = self.node_lps + self.evaluator.lp_count
        counts = {"wall_time": elapsed, "node_count": nodes, "lp_count": lp_count}

        if self.incumbent is None:
            if limit_hit:
                solution = infeasible_solution(self.instance, self.variant, Engine.EXACT, None,
                                               f"{limit_hit} reached without a feasible configuration", **counts)
                return solution.model_copy(update={
                    "metadata": solution.metadata.model_copy(update={"status": SolveStatus.TIME_LIMIT})
                })
            message = "root LP relaxation infeasible" if root_infeasible else "no integral configuration found"
            return infeasible_solution(self.instance, self.variant, Engine.EXACT, InfeasibilityKind.LP,
                                       message, **counts)

        objective = self.incumbent.objective
        open_bounds = [n.estimate for n in stack] + [entry[0] for entry in heap]
        best_bound = min([objective, self.gap_pruned_bound] + open_bounds)
        proven = not limit_hit and not self.unproven and best_bound >= objective - 1e-9 * max(1.0, abs(objective))
        status = SolveStatus.OPTIMAL if proven else SolveStatus.FEASIBLE
        if proven:
            best_bound = objective
        gap = (objective - best_bound) / max(1.0, abs(objective))
        message = limit_hit or (None if proven else "stopped at the relative gap target")
        logger.info(
            f"Branch-and-bound {status.value}: objective {objective:.6f}, bound {best_bound:.6f}, "
            f"{nodes} nodes, {lp_count} LPs, {elapsed:.2f}s"
        )
        metadata = self.incumbent.metadata.model_copy(update={
            "status": status,
            "engine": Engine.EXACT,
            "best_bound": best_bound,
            "gap": gap,
            "message": message,
            **counts,
        })
        return self.incumbent.model_copy(update={"metadata": metadata})


def solve_bnb(instance: Instance, variant: VariantSpec, params: Optional[BnbParams] = None,
              tol: LpTolerances = DEFAULT_TOLERANCES) -> Solution:
    """Solve a variant exactly.

    Returns:
        Optimal, Feasible (limit hit with an incumbent, best bound set),
        TimeLimit (no incumbent) or Infeasible (structural or LP) Solution
    """
    logger.info(f"Solving {instance.name or '<unnamed>'} ({variant.label()}) by branch-and-bound")
    return BranchAndBoundSolver(instance, variant, params, tol).solve()
