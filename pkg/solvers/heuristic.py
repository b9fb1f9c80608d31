"""Matheuristic: greedy construction plus local search over configurations.

Every candidate configuration is scored by solving its routing LP exactly
(through a memoized ConfigurationEvaluator). Moves that break a count row are
repaired with the savings estimates before evaluation, so the search never
leaves the feasible set.
"""
import logging
import time
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Set, Tuple

import numpy as np

from lp import DEFAULT_TOLERANCES, LpTolerances
from models.instance import CostArrays, Instance, LinkMode, VariantSpec
from models.solution import (
    Configuration, Engine, HeuristicParams, InfeasibilityKind, Neighborhood, Solution, SolveMetadata,
    SolveStatus, TracePoint,
)
from formulation import link_cost_coefficients
from .evaluation import ConfigurationEvaluator, infeasible_solution
from .repair import RepairError, repair_configuration

logger = logging.getLogger(__name__)

Link = Tuple[int, int]

IMPROVEMENT_RTOL = 1e-9
NOISE = 0.2


class HeuristicError(Exception):
    """Raised when no configuration can meet the variant's counts."""
    pass


class Savings:
    """Rough per-terminal and per-link savings over shipping everything by road.

    A link {k, m} saves, for every pair whose best route through it beats the
    road, the cost difference times the demand, scaled down when the demand
    exceeds the smaller capacity, minus its link or handling cost. A terminal
    is worth its best link plus what its diagonal routes save, minus its
    opening cost when the variant charges it.
    """

    def __init__(self, arrays: CostArrays, variant: VariantSpec):
        self.p = arrays.p
        pairs = arrays.demand_pairs()
        coefficients = link_cost_coefficients(arrays, variant)
        self.link: Dict[Link, float] = {}
        self.terminal: Dict[int, float] = {}
        if pairs:
            demand = np.array([arrays.demand[i, j] for i, j in pairs])
            road = np.array([arrays.road[i, j] for i, j in pairs])
            routes = arrays.route_costs(pairs)
        for k in range(self.p):
            for m in range(k + 1, self.p):
                gain = 0.0
                if pairs:
                    via = np.minimum(routes[:, k, m], routes[:, m, k])
                    gain = self._capped_gain(demand, road - via, min(arrays.capacity[k], arrays.capacity[m]))
                self.link[(k, m)] = gain - coefficients[(k, m)]
        for k in range(self.p):
            diagonal = 0.0
            if pairs:
                diagonal = self._capped_gain(demand, road - routes[:, k, k], arrays.capacity[k] / 2.0)
            best_link = max([0.0] + [v for link, v in self.link.items() if k in link])
            fixed = float(arrays.fixed_cost[k]) if variant.charges_fixed_cost else 0.0
            self.terminal[k] = best_link + diagonal - fixed

    @staticmethod
    def _capped_gain(demand: np.ndarray, unit_gain: np.ndarray, capacity: float) -> float:
        useful = unit_gain > 0.0
        volume = float(demand[useful].sum())
        if volume <= 0.0:
            return 0.0
        gain = float((demand[useful] * unit_gain[useful]).sum())
        return gain * min(1.0, capacity / volume)

    def perturbed(self, rng: np.random.Generator) -> "Savings":
        """Copy with multiplicative noise, for randomized restarts."""
        copy = object.__new__(Savings)
        copy.p = self.p
        copy.link = {key: v * (1.0 + NOISE * (rng.random() - 0.5)) for key, v in sorted(self.link.items())}
        copy.terminal = {key: v * (1.0 + NOISE * (rng.random() - 0.5)) for key, v in sorted(self.terminal.items())}
        return copy

    def repair(self, variant: VariantSpec, terminals, links) -> Configuration:
        return repair_configuration(self.p, variant, terminals, links, self.terminal, self.link)


def _marginal(savings: Savings, variant: VariantSpec, link: Link, opened: Set[int],
              arrays: CostArrays) -> float:
    value = savings.link[link]
    if variant.charges_fixed_cost:
        value -= sum(float(arrays.fixed_cost[k]) for k in link if k not in opened)
    return value


def greedy_construct(instance: Instance, variant: VariantSpec, seed: int = 0,
                     savings: Optional[Savings] = None) -> Configuration:
    """Savings-driven starting configuration.

    Links are added in decreasing marginal savings (opening costs of new
    endpoints included): up to exactly l links in exact mode, and while the
    marginal stays positive otherwise. With a fixed terminal count the q best
    terminals are chosen first and links stay among them. Seed 0 is the pure
    greedy; other seeds perturb the estimates.

    Raises:
        HeuristicError: If the variant's counts are structurally infeasible
    """
    variant.check_against(instance)
    reason = variant.structural_infeasibility(instance.p)
    if reason is not None:
        raise HeuristicError(reason)

    arrays = instance.to_arrays()
    savings = savings or Savings(arrays, variant)
    if seed:
        savings = savings.perturbed(np.random.default_rng(seed))

    opened: Set[int] = set()
    chosen: Set[Link] = set()
    if variant.has_terminal_count:
        ranked = sorted(range(arrays.p), key=lambda k: (-savings.terminal[k], k))
        opened = set(ranked[:variant.q_terminals])

    limit = variant.l if variant.has_link_count else None
    must_fill = variant.has_link_count and variant.link_mode == LinkMode.EXACT
    while limit is None or len(chosen) < limit:
        if variant.has_terminal_count:
            candidates = [link for link in combinations(sorted(opened), 2) if link not in chosen]
        else:
            candidates = [link for link in savings.link if link not in chosen]
        if not candidates:
            break
        link = min(candidates, key=lambda c: (-_marginal(savings, variant, c, opened, arrays), c))
        if _marginal(savings, variant, link, opened, arrays) <= 0.0 and not must_fill:
            break
        chosen.add(link)
        opened.update(link)

    try:
        config = savings.repair(variant, opened, chosen)
    except RepairError as e:
        raise HeuristicError(str(e)) from e
    logger.debug(f"Greedy start {config.key()}")
    return config


class _Search:
    """Shared state of one heuristic run."""

    def __init__(self, instance: Instance, variant: VariantSpec, params: HeuristicParams,
                 evaluator: ConfigurationEvaluator, savings: Savings, started: float, deadline: float):
        self.instance = instance
        self.variant = variant
        self.params = params
        self.evaluator = evaluator
        self.savings = savings
        self.started = started
        self.deadline = deadline
        self.iteration = 0
        self.best: Optional[Solution] = None
        self.trace: List[TracePoint] = []

    def exhausted(self) -> bool:
        """Evaluation budget spent, or the wall-clock cap passed."""
        return self.iteration >= self.params.max_evaluations or time.perf_counter() >= self.deadline

    def note(self, solution: Solution) -> None:
        self.iteration += 1
        if solution.objective is None:
            return
        if self.best is None or solution.objective < self.best.objective - IMPROVEMENT_RTOL * max(1.0, abs(self.best.objective)):
            self.best = solution
            self.trace.append(TracePoint(
                iteration=self.iteration,
                best_objective=solution.objective,
                elapsed=time.perf_counter() - self.started,
            ))

    def _fix(self, terminals, links) -> Optional[Configuration]:
        try:
            return self.savings.repair(self.variant, terminals, links)
        except RepairError:
            return None

    def neighbors(self, kind: Neighborhood, current: Configuration) -> Iterator[Configuration]:
        p = self.instance.p
        opened = set(current.open_terminals)
        links = set(current.links)
        fixed_count = self.variant.has_terminal_count
        if kind == Neighborhood.TOGGLE_TERMINAL:
            for k in range(p):
                if k in opened:
                    yield self._fix(opened - {k}, {link for link in links if k not in link})
                else:
                    yield self._fix(opened | {k}, links)
        elif kind == Neighborhood.ADD_REMOVE_LINK:
            for link in combinations(range(p), 2):
                if link in links:
                    yield self._fix(opened, links - {link})
                elif not fixed_count or set(link) <= opened:
                    yield self._fix(opened | set(link), links | {link})
        elif kind == Neighborhood.SWAP_LINK:
            for old in sorted(links):
                for new in combinations(range(p), 2):
                    if new in links or (fixed_count and not set(new) <= opened):
                        continue
                    yield self._fix(opened | set(new), (links - {old}) | {new})
        elif kind == Neighborhood.SWAP_TERMINAL:
            for k in sorted(opened):
                for m in range(p):
                    if m in opened:
                        continue
                    rewired = set()
                    for a, b in links:
                        a, b = (m if a == k else a), (m if b == k else b)
                        if a != b:
                            rewired.add((min(a, b), max(a, b)))
                    yield self._fix((opened - {k}) | {m}, rewired)

    def local_search(self, start: Configuration) -> Optional[Solution]:
        if self.exhausted():
            return None
        start = self._fix(start.open_terminals, start.links) or start
        current = self.evaluator.evaluate(start)
        self.note(current)
        if current.objective is None:
            return current
        improved = True
        while improved and not self.exhausted():
            improved = False
            for kind in self.params.neighborhood_order:
                for candidate in self.neighbors(kind, current.configuration):
                    if candidate is None or candidate == current.configuration:
                        continue
                    if self.exhausted():
                        return current
                    solution = self.evaluator.evaluate(candidate)
                    self.note(solution)
                    threshold = current.objective - IMPROVEMENT_RTOL * max(1.0, abs(current.objective))
                    if solution.objective is not None and solution.objective < threshold:
                        logger.debug(f"{kind.value} move to {candidate.key()}: {solution.objective:.6f}")
                        current = solution
                        improved = True
                        break
                if improved:
                    break
        return current

    def perturb(self, config: Configuration, rng: np.random.Generator) -> Optional[Configuration]:
        """Exchange up to two links for random non-links, then flip one terminal."""
        p = self.instance.p
        links = sorted(config.links)
        opened = set(config.open_terminals)
        drop = min(2, len(links))
        removed = set(tuple(links[i]) for i in rng.choice(len(links), size=drop, replace=False)) if drop else set()
        kept = set(links) - removed
        pool = [link for link in combinations(range(p), 2) if link not in config.links]
        add = min(len(removed) or 2, len(pool))
        added = set(tuple(pool[i]) for i in rng.choice(len(pool), size=add, replace=False)) if add else set()
        new_links = kept | added
        for link in added:
            opened.update(link)
        flip = int(rng.integers(p))
        if flip in opened:
            opened.discard(flip)
            new_links = {link for link in new_links if flip not in link}
        else:
            opened.add(flip)
        return self._fix(opened, new_links)


def _result(search: _Search, started: float, params: HeuristicParams) -> Solution:
    best = search.best
    if best is None:
        return Solution(
            instance_name=search.instance.name,
            variant=search.variant,
            metadata=SolveMetadata(
                status=SolveStatus.TIME_LIMIT,
                engine=Engine.HEURISTIC,
                wall_time=time.perf_counter() - started,
                node_count=search.iteration,
                lp_count=search.evaluator.lp_count,
                message="time budget spent before a configuration was evaluated",
            ),
        )
    gap = None
    if params.reference_bound is not None:
        gap = (best.objective - params.reference_bound) / max(1.0, abs(params.reference_bound))
    metadata = best.metadata.model_copy(update={
        "status": SolveStatus.FEASIBLE,
        "engine": Engine.HEURISTIC,
        "wall_time": time.perf_counter() - started,
        "node_count": search.iteration,
        "lp_count": search.evaluator.lp_count,
        "best_bound": params.reference_bound,
        "gap": gap,
        "trace": list(search.trace),
    })
    return best.model_copy(update={"metadata": metadata})


def local_search(instance: Instance, variant: VariantSpec, start: Configuration,
                 params: Optional[HeuristicParams] = None,
                 tol: LpTolerances = DEFAULT_TOLERANCES) -> Solution:
    """First-improvement descent from ``start`` through the neighborhoods.

    After each accepted move the search restarts from the first
    neighborhood; it stops at a configuration no neighborhood improves, or
    when ``max_evaluations`` or the time cap runs out.

    Returns:
        Best configuration found, status Feasible, with its trace; TimeLimit
        without a configuration if the cap passed before any evaluation
    """
    params = params or HeuristicParams()
    started = time.perf_counter()
    arrays = instance.to_arrays()
    evaluator = ConfigurationEvaluator(instance, variant, tol, started + params.time_budget)
    search = _Search(instance, variant, params, evaluator, Savings(arrays, variant),
                     started, started + params.time_budget)
    search.local_search(start)
    return _result(search, started, params)


def solve_heuristic(instance: Instance, variant: VariantSpec, params: Optional[HeuristicParams] = None,
                    tol: LpTolerances = DEFAULT_TOLERANCES) -> Solution:
    """Multi-start local search within the evaluation budget.

    The first start is the pure greedy; each later start perturbs the best
    configuration so far with a seeded link exchange and terminal flip.
    Stops after ``restarts`` restarts, ``max_non_improving`` restarts in a
    row without improvement, or ``max_evaluations`` evaluations. The time
    budget is only a wall-clock cap; runs that stop on the evaluation count
    are repeatable for a given seed.
    """
    params = params or HeuristicParams()
    started = time.perf_counter()
    variant.check_against(instance)
    reason = variant.structural_infeasibility(instance.p)
    if reason is not None:
        return infeasible_solution(instance, variant, Engine.HEURISTIC, InfeasibilityKind.STRUCTURAL, reason)

    arrays = instance.to_arrays()
    savings = Savings(arrays, variant)
    evaluator = ConfigurationEvaluator(instance, variant, tol, started + params.time_budget)
    search = _Search(instance, variant, params, evaluator, savings, started, started + params.time_budget)
    rng = np.random.default_rng(params.seed)

    logger.info(
        f"Heuristic on {instance.name or '<unnamed>'} ({variant.label()}), "
        f"budget {params.max_evaluations} evaluations or {params.time_budget}s"
    )
    search.local_search(greedy_construct(instance, variant, 0, savings))
    stale = 0
    for restart in range(1, params.restarts + 1):
        if search.best is None or search.exhausted() or stale >= params.max_non_improving:
            break
        before = search.best.objective
        start = search.perturb(search.best.configuration, rng)
        if start is None:
            start = greedy_construct(instance, variant, restart, savings)
        search.local_search(start)
        stale = 0 if search.best.objective < before else stale + 1

    solution = _result(search, started, params)
    if solution.objective is None:
        logger.warning(f"Heuristic stopped before evaluating a configuration ({solution.metadata.wall_time:.2f}s)")
        return solution
    logger.info(
        f"Heuristic best {solution.objective:.6f} after {search.iteration} evaluations "
        f"({evaluator.lp_count} LPs, {solution.metadata.wall_time:.2f}s)"
    )
    return solution
