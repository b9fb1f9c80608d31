"""Test evaluation of fixed configurations."""
import time

import pytest

from formulation import ConfigurationError
from models.instance import LinkMode, VariantSpec
from models.solution import Configuration, Engine, InfeasibilityKind, SolveStatus
from solvers import ConfigurationEvaluator, evaluate_configuration

BOTH_OPEN_LINKED = Configuration.of([0, 1], [(0, 1)])


def test_linked_configuration(toy_instance):
    """Test all demand takes the link 0 -> 1."""
    solution = evaluate_configuration(toy_instance, VariantSpec.base(1), BOTH_OPEN_LINKED)
    assert solution.status == SolveStatus.FEASIBLE
    assert solution.metadata.engine == Engine.EVALUATE
    assert solution.objective == pytest.approx(240.0)
    assert solution.breakdown.routing_intermodal == pytest.approx(220.0)
    assert solution.breakdown.fixed_cost_total == 20.0
    assert solution.breakdown.total == pytest.approx(solution.objective)
    assert [(f.i, f.j, f.k, f.m) for f in solution.intermodal_flows] == [(0, 1, 0, 1)]
    assert solution.intermodal_flows[0].amount == pytest.approx(10.0)
    assert solution.road_flows == []


@pytest.mark.parametrize("opened,expected", [
    ([], 1000.0),
    ([0], 520.0),
    ([1], 520.0),
    ([0, 1], 530.0),
])
def test_configurations_without_links(toy_instance, opened, expected):
    """Test single-terminal routes and road fallback."""
    solution = evaluate_configuration(toy_instance, VariantSpec.base(0), Configuration.of(opened, []))
    assert solution.objective == pytest.approx(expected)


def test_road_only_flows(toy_instance):
    """Test closing everything ships the pair by road."""
    solution = evaluate_configuration(toy_instance, VariantSpec.base(0), Configuration.of([], []))
    assert solution.intermodal_flows == []
    assert [(f.i, f.j, f.amount) for f in solution.road_flows] == [(0, 1, 10.0)]


def test_variant_costs(toy_instance):
    """Test link, handling and no-fixed-cost objectives of the same configuration."""
    assert evaluate_configuration(
        toy_instance, VariantSpec.min_links(2), BOTH_OPEN_LINKED).objective == pytest.approx(260.0)
    assert evaluate_configuration(
        toy_instance, VariantSpec.pl(2, 1), BOTH_OPEN_LINKED).objective == pytest.approx(220.0)
    handling = evaluate_configuration(
        toy_instance, VariantSpec.handling(1, [[0.0, 3.0], [4.0, 0.0]]), BOTH_OPEN_LINKED)
    assert handling.objective == pytest.approx(247.0)
    assert handling.breakdown.link_cost_total == 7.0


def test_capacity_splits_flow(make_toy):
    """Test a tight terminal sends the remainder through the other terminal."""
    instance = make_toy(capacity=(4.0, 100.0))
    solution = evaluate_configuration(instance, VariantSpec.base(1), BOTH_OPEN_LINKED)
    assert solution.objective == pytest.approx(414.0)
    routed = {(f.k, f.m): f.amount for f in solution.intermodal_flows}
    assert routed[(0, 1)] == pytest.approx(4.0)
    assert routed[(1, 1)] == pytest.approx(6.0)


def test_cardinality_mismatch_is_infeasible(toy_instance):
    """Test a wrong link count is reported without solving an LP."""
    solution = evaluate_configuration(toy_instance, VariantSpec.base(1), Configuration.of([0, 1], []))
    assert solution.status == SolveStatus.INFEASIBLE
    assert solution.metadata.infeasibility == InfeasibilityKind.CARDINALITY
    assert solution.metadata.lp_count == 0
    assert "exactly 1" in solution.metadata.message
    assert solution.objective is None


def test_at_most_accepts_fewer_links(toy_instance):
    """Test an upper-bounded link count accepts a smaller network."""
    variant = VariantSpec.base(1, LinkMode.AT_MOST)
    solution = evaluate_configuration(toy_instance, variant, Configuration.of([0], []))
    assert solution.objective == pytest.approx(520.0)


def test_inconsistent_configuration_raises(toy_instance):
    """Test a link to a closed terminal is an error, not an infeasible result."""
    with pytest.raises(ConfigurationError, match="closed terminal"):
        evaluate_configuration(toy_instance, VariantSpec.base(1), Configuration.of([0], [(0, 1)]))


def test_evaluator_cache(toy_instance):
    """Test repeated evaluations reuse the cached result."""
    evaluator = ConfigurationEvaluator(toy_instance, VariantSpec.base(1))
    first = evaluator.evaluate(BOTH_OPEN_LINKED)
    second = evaluator.evaluate(Configuration.of([1, 0], [(1, 0)]))
    assert first is second
    assert evaluator.hits == 1
    assert evaluator.lp_count == 1
    assert evaluator.objective(Configuration.of([0, 1], [])) == float("inf")


def test_past_deadline_is_not_cached(toy_instance):
    """Test a routing LP cut off by its deadline is reported and evaluated again later."""
    variant = VariantSpec.base(1)
    stopped = evaluate_configuration(toy_instance, variant, BOTH_OPEN_LINKED, deadline=time.perf_counter() - 1.0)
    assert stopped.status == SolveStatus.TIME_LIMIT
    assert stopped.objective is None

    evaluator = ConfigurationEvaluator(toy_instance, variant, deadline=time.perf_counter() - 1.0)
    assert evaluator.evaluate(BOTH_OPEN_LINKED).status == SolveStatus.TIME_LIMIT
    assert evaluator.cache == {}
    evaluator.deadline = None
    assert evaluator.evaluate(BOTH_OPEN_LINKED).objective == pytest.approx(240.0)
    assert BOTH_OPEN_LINKED in evaluator.cache
