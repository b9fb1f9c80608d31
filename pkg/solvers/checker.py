"""Independent feasibility and objective check of a solution."""
import logging
from typing import Dict, Tuple

from models.instance import Instance, LinkMode, VariantSpec, is_close
from models.solution import FeasibilityReport, Solution
from .evaluation import compute_breakdown

logger = logging.getLogger(__name__)


DEFAULT_FEAS_TOL = 1e-7
PROP1_RTOL = 1e-7
OBJECTIVE_RTOL = 1e-6

FAMILIES = ("Eq2", "Eq3", "Eq4-5", "Eq7", "Eq8", "Eq10", "bounds")


class _Residuals:
    def __init__(self, feas_tol: float):
        self.feas_tol = feas_tol
        self.worst: Dict[str, float] = {family: 0.0 for family in FAMILIES}
        self.where: Dict[str, str] = {}
        self.violations = []
        self.out_of_range = False

    def record(self, family: str, residual: float, location: str, scale: float = 1.0) -> None:
        if residual > self.worst[family]:
            self.worst[family] = residual
            self.where[family] = location
        if residual > self.feas_tol * max(1.0, scale):
            self.violations.append(f"{family} residual {residual:.6g} at {location}")


def check_solution(instance: Instance, variant: VariantSpec, solution: Solution,
                   feas_tol: float = DEFAULT_FEAS_TOL) -> FeasibilityReport:
    """Residuals of a solution per constraint family.

    Solutions without an objective (Infeasible, TimeLimit) carry no flows and
    produce an empty report. Violations are returned as data.
    """
    if solution.objective is None:
        return FeasibilityReport()

    arrays = instance.to_arrays()
    n, p = arrays.n, arrays.p
    config = solution.configuration
    checks = _Residuals(feas_tol)

    for problem in config.violations(p):
        checks.record("Eq4-5", 1.0, problem)

    opened = set(config.open_terminals)
    linked = set(config.links)
    shipped: Dict[Tuple[int, int], float] = {}
    throughput = [0.0] * p
    diagonal = 0.0

    for flow in solution.intermodal_flows:
        label = f"x({flow.i}, {flow.j}, {flow.k}, {flow.m})"
        if not (0 <= flow.i < n and 0 <= flow.j < n and 0 <= flow.k < p and 0 <= flow.m < p):
            checks.record("bounds", abs(flow.amount) or 1.0, f"{label} index out of range")
            checks.out_of_range = True
            continue
        q_ij = float(arrays.demand[flow.i, flow.j])
        checks.record("bounds", -flow.amount, label)
        checks.record("bounds", flow.amount - q_ij, label, scale=q_ij)
        shipped[(flow.i, flow.j)] = shipped.get((flow.i, flow.j), 0.0) + flow.amount
        throughput[flow.k] += flow.amount
        throughput[flow.m] += flow.amount
        if flow.k == flow.m:
            diagonal += flow.amount
            carried = flow.k in opened
        else:
            carried = (min(flow.k, flow.m), max(flow.k, flow.m)) in linked
        if not carried:
            checks.record("Eq8", flow.amount, label, scale=q_ij)

    for flow in solution.road_flows:
        label = f"w({flow.i}, {flow.j})"
        if not (0 <= flow.i < n and 0 <= flow.j < n):
            checks.record("bounds", abs(flow.amount) or 1.0, f"{label} index out of range")
            checks.out_of_range = True
            continue
        checks.record("bounds", -flow.amount, label)
        shipped[(flow.i, flow.j)] = shipped.get((flow.i, flow.j), 0.0) + flow.amount

    pairs = {(i, j) for i in range(n) for j in range(n) if arrays.demand[i, j] > 0.0} | set(shipped)
    for i, j in sorted(pairs):
        q_ij = float(arrays.demand[i, j])
        checks.record("Eq2", abs(shipped.get((i, j), 0.0) - q_ij), f"pair ({i}, {j})", scale=q_ij)

    for k in range(p):
        allowed = float(arrays.capacity[k]) if k in opened else 0.0
        checks.record("Eq3", throughput[k] - allowed, f"terminal {k}", scale=allowed)

    if variant.has_link_count:
        excess = config.num_links - variant.l
        residual = abs(excess) if variant.link_mode == LinkMode.EXACT else max(0, excess)
        checks.record("Eq7", float(residual), f"{config.num_links} links for l={variant.l}")
    if variant.has_terminal_count:
        checks.record("Eq10", float(abs(config.num_open - variant.q_terminals)),
                      f"{config.num_open} terminals for q={variant.q_terminals}")

    report = FeasibilityReport(
        residuals=dict(checks.worst),
        worst_location=dict(checks.where),
        violations=list(checks.violations),
        diagonal_flow=diagonal,
    )

    if instance.triangle_ok:
        limit = PROP1_RTOL * float(arrays.demand.sum())
        report.prop1_checked = True
        report.prop1_ok = diagonal <= limit
        if not report.prop1_ok:
            report.violations.append(f"Prop1 diagonal routes carry {diagonal:.6g} > {limit:.6g}")

    report.objective_claimed = solution.objective
    if checks.out_of_range or any("out of range" in problem for problem in config.violations(p)):
        report.violations.append("objective not recomputed: indices out of range")
        return report
    recomputed = compute_breakdown(arrays, variant, config, solution.intermodal_flows, solution.road_flows).total
    report.objective_recomputed = recomputed
    report.objective_ok = is_close(solution.objective, recomputed, OBJECTIVE_RTOL)
    if not report.objective_ok:
        report.violations.append(f"objective {solution.objective:.6f} differs from recomputed {recomputed:.6f}")

    if report.violations:
        logger.info(f"Solution check found {len(report.violations)} violations")
    return report
