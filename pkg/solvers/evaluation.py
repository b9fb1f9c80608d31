"""Evaluate one configuration: fix the binaries and solve the routing LP."""
import logging
import time
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from formulation import build_model, fix_configuration, link_cost_coefficients
from formulation.fixing import ConfigurationError
from lp import DEFAULT_TOLERANCES, LpStatus, LpTolerances, solve_lp, to_lp_problem
from models.instance import CostArrays, Instance, LinkMode, VariantSpec
from models.solution import (
    Configuration, CostBreakdown, Engine, FlowEntry, InfeasibilityKind, RoadFlow, Solution,
    SolveMetadata, SolveStatus,
)

logger = logging.getLogger(__name__)


FLOW_EPS = 1e-9
TIE_RTOL = 1e-9


def cardinality_problem(variant: VariantSpec, config: Configuration) -> Optional[str]:
    """Why ``config`` breaks the variant's link or terminal count, if it does."""
    if variant.has_link_count:
        if variant.link_mode == LinkMode.EXACT and config.num_links != variant.l:
            return f"{config.num_links} links, exactly {variant.l} required"
        if variant.link_mode == LinkMode.AT_MOST and config.num_links > variant.l:
            return f"{config.num_links} links, at most {variant.l} allowed"
    if variant.has_terminal_count and config.num_open != variant.q_terminals:
        return f"{config.num_open} open terminals, exactly {variant.q_terminals} required"
    return None


def compute_breakdown(arrays: CostArrays, variant: VariantSpec, config: Configuration,
                      intermodal: Iterable[FlowEntry], road: Iterable[RoadFlow]) -> CostBreakdown:
    """Cost families of a configuration and its flows."""
    routing_road = sum(flow.amount * float(arrays.road[flow.i, flow.j]) for flow in road)
    routing_intermodal = sum(
        flow.amount * float(
            arrays.access[flow.i, flow.k] + arrays.alpha * arrays.inter[flow.k, flow.m] + arrays.access[flow.j, flow.m]
        )
        for flow in intermodal
    )
    fixed_total = 0.0
    if variant.charges_fixed_cost:
        fixed_total = float(sum(arrays.fixed_cost[k] for k in config.open_terminals))
    coefficients = link_cost_coefficients(arrays, variant)
    link_total = float(sum(coefficients[link] for link in config.links))
    return CostBreakdown(
        routing_road=float(routing_road),
        routing_intermodal=float(routing_intermodal),
        fixed_cost_total=fixed_total,
        link_cost_total=link_total,
    )


def is_better(objective: float, config: Configuration, best: Optional[Solution]) -> bool:
    """Strictly lower cost, or equal cost and a smaller configuration key."""
    if best is None or best.objective is None:
        return True
    slack = TIE_RTOL * max(1.0, abs(best.objective))
    if objective < best.objective - slack:
        return True
    return abs(objective - best.objective) <= slack and config.key() < best.configuration.key()


def infeasible_solution(instance: Instance, variant: VariantSpec, engine: Engine,
                        kind: InfeasibilityKind, message: str, **metadata) -> Solution:
    return Solution(
        instance_name=instance.name,
        variant=variant,
        metadata=SolveMetadata(
            status=SolveStatus.INFEASIBLE, engine=engine, infeasibility=kind, message=message, **metadata
        ),
    )


def evaluate_configuration(instance: Instance, variant: VariantSpec, config: Configuration,
                           tol: LpTolerances = DEFAULT_TOLERANCES, deadline: Optional[float] = None) -> Solution:
    """Objective and flows of a fixed configuration.

    Configurations breaking the variant's cardinality rows come back
    Infeasible without an LP solve. Otherwise the routing LP is always
    feasible (road absorbs every demand) and the result is Feasible, unless
    the LP runs past ``deadline`` (a ``time.perf_counter()`` value), which
    gives a TimeLimit result without an objective.

    Raises:
        ConfigurationError: If a link joins a closed terminal or an index is
            out of range
    """
    started = time.perf_counter()
    problems = config.violations(instance.p)
    if problems:
        raise ConfigurationError("; ".join(problems))

    reason = cardinality_problem(variant, config)
    if reason is not None:
        return infeasible_solution(instance, variant, Engine.EVALUATE, InfeasibilityKind.CARDINALITY,
                                   reason, wall_time=time.perf_counter() - started)

    model = build_model(instance, variant, restrict_to=config)
    fixed = fix_configuration(model, config)
    result = solve_lp(to_lp_problem(fixed), tol, deadline=deadline)
    if result.status == LpStatus.TIME_LIMIT:
        return Solution(
            instance_name=instance.name,
            variant=variant,
            metadata=SolveMetadata(
                status=SolveStatus.TIME_LIMIT, engine=Engine.EVALUATE, message=result.message,
                lp_count=1, wall_time=time.perf_counter() - started,
            ),
        )
    if not result.optimal:
        logger.warning(f"Routing LP for {config.key()} ended {result.status.value}: {result.message}")
        return infeasible_solution(instance, variant, Engine.EVALUATE, InfeasibilityKind.LP,
                                   f"routing LP {result.status.value}", lp_count=1,
                                   wall_time=time.perf_counter() - started)

    arrays = instance.to_arrays()
    intermodal: List[FlowEntry] = []
    shipped: Dict[Tuple[int, int], float] = {}
    for (i, j, k, m), col in sorted(fixed.x_index.items()):
        amount = float(np.clip(result.x[col], 0.0, arrays.demand[i, j]))
        if amount > FLOW_EPS:
            intermodal.append(FlowEntry(i=i, j=j, k=k, m=m, amount=amount))
            shipped[(i, j)] = shipped.get((i, j), 0.0) + amount
    road: List[RoadFlow] = []
    for i, j in model.pairs:
        amount = max(0.0, float(arrays.demand[i, j]) - shipped.get((i, j), 0.0))
        if amount > FLOW_EPS:
            road.append(RoadFlow(i=i, j=j, amount=amount))

    breakdown = compute_breakdown(arrays, variant, config, intermodal, road)
    return Solution(
        instance_name=instance.name,
        variant=variant,
        metadata=SolveMetadata(
            status=SolveStatus.FEASIBLE,
            engine=Engine.EVALUATE,
            wall_time=time.perf_counter() - started,
            lp_count=1,
        ),
        objective=breakdown.total,
        breakdown=breakdown,
        configuration=config,
        intermodal_flows=intermodal,
        road_flows=road,
    )


class ConfigurationEvaluator:
    """Memoized evaluate_configuration for one instance and variant.

    Results cut short by ``deadline`` are returned but never cached.
    """

    def __init__(self, instance: Instance, variant: VariantSpec, tol: LpTolerances = DEFAULT_TOLERANCES,
                 deadline: Optional[float] = None):
        self.instance = instance
        self.variant = variant
        self.tol = tol
        self.deadline = deadline
        self.cache: Dict[Configuration, Solution] = {}
        self.lp_count = 0
        self.hits = 0

    def evaluate(self, config: Configuration) -> Solution:
        cached = self.cache.get(config)
        if cached is not None:
            self.hits += 1
            return cached
        solution = evaluate_configuration(self.instance, self.variant, config, self.tol, self.deadline)
        self.lp_count += solution.metadata.lp_count
        if solution.metadata.status != SolveStatus.TIME_LIMIT:
            self.cache[config] = solution
        return solution

    def objective(self, config: Configuration) -> float:
        """Objective of ``config``, +inf when it is infeasible."""
        solution = self.evaluate(config)
        return solution.objective if solution.objective is not None else float("inf")
