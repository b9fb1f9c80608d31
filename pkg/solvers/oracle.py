"""Brute-force enumeration oracle for tiny instances."""
import logging
import time
from itertools import combinations
from math import comb
from typing import Iterator, List

from lp import DEFAULT_TOLERANCES, LpTolerances
from models.instance import Instance, LinkMode, VariantSpec, max_links
from models.solution import Configuration, Engine, InfeasibilityKind, Solution, SolveStatus
from .evaluation import ConfigurationEvaluator, infeasible_solution, is_better

logger = logging.getLogger(__name__)


MAX_ORACLE_LINK_PAIRS = 12
ENUMERATION_CAP = 10 ** 6


class EnumerationCapError(Exception):
    """Raised when an instance is too large to enumerate."""
    pass


def _terminal_sizes(p: int, variant: VariantSpec) -> List[int]:
    if variant.has_terminal_count:
        return [variant.q_terminals]
    return list(range(p + 1))


def _link_counts(pairs: int, variant: VariantSpec) -> List[int]:
    if not variant.has_link_count:
        return list(range(pairs + 1))
    if variant.link_mode == LinkMode.EXACT:
        return [variant.l] if variant.l <= pairs else []
    return list(range(min(variant.l, pairs) + 1))


def count_configurations(p: int, variant: VariantSpec) -> int:
    """Number of configurations enumerate_configurations yields."""
    total = 0
    for size in _terminal_sizes(p, variant):
        pairs = max_links(size)
        total += comb(p, size) * sum(comb(pairs, c) for c in _link_counts(pairs, variant))
    return total


def check_enumeration_cap(p: int, variant: VariantSpec) -> int:
    """Return the enumeration count, or refuse an oversized instance.

    Raises:
        EnumerationCapError: Stating the cap that was exceeded
    """
    if max_links(p) > MAX_ORACLE_LINK_PAIRS:
        raise EnumerationCapError(
            f"p={p} gives {max_links(p)} candidate links; the oracle enumerates at most "
            f"{MAX_ORACLE_LINK_PAIRS} (p <= 5)"
        )
    count = count_configurations(p, variant)
    if count > ENUMERATION_CAP:
        raise EnumerationCapError(f"{count} configurations exceed the enumeration cap of {ENUMERATION_CAP}")
    return count


def enumerate_configurations(p: int, variant: VariantSpec) -> Iterator[Configuration]:
    """Every configuration meeting the variant's counts.

    Order: terminal-set size ascending, terminal sets lexicographic, link
    count ascending, link sets lexicographic.
    """
    for size in _terminal_sizes(p, variant):
        for opened in combinations(range(p), size):
            pairs = list(combinations(opened, 2))
            for count in _link_counts(len(pairs), variant):
                for links in combinations(pairs, count):
                    yield Configuration.of(opened, links)


def brute_force(instance: Instance, variant: VariantSpec, tol: LpTolerances = DEFAULT_TOLERANCES) -> Solution:
    """Global optimum by evaluating every admissible configuration.

    Raises:
        EnumerationCapError: If the instance exceeds the enumeration cap
    """
    started = time.perf_counter()
    variant.check_against(instance)
    reason = variant.structural_infeasibility(instance.p)
    if reason is not None:
        return infeasible_solution(instance, variant, Engine.ORACLE, InfeasibilityKind.STRUCTURAL, reason)

    count = check_enumeration_cap(instance.p, variant)
    logger.info(f"Enumerating {count} configurations for {variant.label()}")
    evaluator = ConfigurationEvaluator(instance, variant, tol)
    best = None
    for config in enumerate_configurations(instance.p, variant):
        solution = evaluator.evaluate(config)
        if solution.objective is not None and is_better(solution.objective, config, best):
            best = solution

    elapsed = time.perf_counter() - started
    if best is None:
        return infeasible_solution(instance, variant, Engine.ORACLE, InfeasibilityKind.LP,
                                   "no configuration admits a feasible routing",
                                   lp_count=evaluator.lp_count, node_count=count, wall_time=elapsed)

    metadata = best.metadata.model_copy(update={
        "status": SolveStatus.OPTIMAL,
        "engine": Engine.ORACLE,
        "wall_time": elapsed,
        "node_count": count,
        "lp_count": evaluator.lp_count,
        "best_bound": best.objective,
        "gap": 0.0,
    })
    logger.info(f"Oracle optimum {best.objective:.6f} at {best.configuration.key()} ({elapsed:.2f}s)")
    return best.model_copy(update={"metadata": metadata})
