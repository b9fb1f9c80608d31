"""Test the matheuristic and configuration repair."""
import pytest

from generators import GenSpec, generate
from models.instance import LinkMode, VariantSpec
from models.solution import Configuration, Engine, HeuristicParams, Neighborhood, SolveStatus
from solvers import (
    HeuristicError, RepairError, brute_force, check_solution, evaluate_configuration, greedy_construct,
    local_search, repair_configuration, solve_heuristic,
)
from solvers.evaluation import cardinality_problem

PARAMS = HeuristicParams(time_budget=60.0, restarts=4, seed=3)


def test_heuristic_never_beats_the_optimum(small_instances):
    """Test heuristic objectives are feasible upper bounds on the optimum."""
    for instance in small_instances(6):
        for variant in (VariantSpec.base(1), VariantSpec.min_links(2), VariantSpec.pl(2, 1),
                        VariantSpec.base(1, LinkMode.AT_MOST)):
            heuristic = solve_heuristic(instance, variant, PARAMS)
            oracle = brute_force(instance, variant)
            assert heuristic.status == SolveStatus.FEASIBLE
            assert heuristic.objective >= oracle.objective - 1e-6 * max(1.0, abs(oracle.objective))
            assert cardinality_problem(variant, heuristic.configuration) is None
            assert check_solution(instance, variant, heuristic).ok


def test_toy_heuristic_finds_optimum(toy_instance):
    """Test the only admissible configuration is found."""
    solution = solve_heuristic(toy_instance, VariantSpec.base(1), PARAMS)
    assert solution.metadata.engine == Engine.HEURISTIC
    assert solution.objective == pytest.approx(240.0)


def test_heuristic_is_deterministic(coordinate_instance):
    """Test the same seed reproduces the same run."""
    first = solve_heuristic(coordinate_instance, VariantSpec.base(2), PARAMS)
    second = solve_heuristic(coordinate_instance, VariantSpec.base(2), PARAMS)
    assert first.configuration == second.configuration
    assert first.objective == second.objective
    assert [t.best_objective for t in first.metadata.trace] == [t.best_objective for t in second.metadata.trace]


def test_evaluation_budget_makes_runs_repeatable():
    """Test runs stopped by the evaluation count match exactly, counts included."""
    instance = generate(GenSpec(n=8, p=5, seed=11))
    params = HeuristicParams(time_budget=600.0, max_evaluations=25, restarts=50, max_non_improving=50, seed=3)
    runs = [solve_heuristic(instance, VariantSpec.base(2), params) for _ in range(3)]
    for run in runs:
        assert run.metadata.node_count == 25
        assert run.status == SolveStatus.FEASIBLE
    first = runs[0]
    for run in runs[1:]:
        assert run.objective == first.objective
        assert run.configuration == first.configuration
        assert run.metadata.lp_count == first.metadata.lp_count
        assert [(t.iteration, t.best_objective) for t in run.metadata.trace] == \
            [(t.iteration, t.best_objective) for t in first.metadata.trace]


def test_larger_evaluation_budget_never_worsens():
    """Test doubling the evaluation budget keeps or improves the result for a fixed seed."""
    instance = generate(GenSpec(n=8, p=5, seed=11))
    objectives = []
    for budget in (5, 10, 20, 40):
        params = HeuristicParams(time_budget=600.0, max_evaluations=budget, restarts=50, seed=3)
        solution = solve_heuristic(instance, VariantSpec.base(2), params)
        assert solution.metadata.node_count <= budget
        objectives.append(solution.objective)
    for smaller, larger in zip(objectives, objectives[1:]):
        assert larger <= smaller


def test_spent_time_budget_stops_cleanly(coordinate_instance):
    """Test a budget that is gone before the first evaluation yields TimeLimit, not a crash."""
    params = HeuristicParams(time_budget=1e-9, seed=3)
    solution = solve_heuristic(coordinate_instance, VariantSpec.base(2), params)
    assert solution.status in (SolveStatus.TIME_LIMIT, SolveStatus.FEASIBLE)
    if solution.status == SolveStatus.TIME_LIMIT:
        assert solution.objective is None
        assert solution.metadata.engine == Engine.HEURISTIC


@pytest.mark.slow
def test_heuristic_matches_oracle_on_tiny_instances():
    """Test 50 seeded tiny runs reach the enumerated optimum at least 90% of the time."""
    hits = 0
    for s in range(50):
        n, p = 2 + s % 4, 2 + (s // 4) % 3
        instance = generate(GenSpec(n=n, p=p, seed=5000 + s))
        variant = VariantSpec.base(1)
        heuristic = solve_heuristic(instance, variant, HeuristicParams(time_budget=60.0, seed=s))
        optimum = brute_force(instance, variant).objective
        tolerance = 1e-6 * max(1.0, abs(optimum))
        assert heuristic.objective >= optimum - tolerance
        if heuristic.objective <= optimum + tolerance:
            hits += 1
    assert hits >= 45


def test_trace_is_monotone(coordinate_instance):
    """Test the anytime trace only ever improves and ends at the result."""
    solution = solve_heuristic(coordinate_instance, VariantSpec.base(2), PARAMS)
    trace = solution.metadata.trace
    assert trace
    values = [point.best_objective for point in trace]
    assert values == sorted(values, reverse=True)
    assert values[-1] == pytest.approx(solution.objective)
    assert [point.iteration for point in trace] == sorted(point.iteration for point in trace)


def test_reference_bound_gap(coordinate_instance):
    """Test the gap is reported against a supplied bound."""
    optimum = brute_force(coordinate_instance, VariantSpec.base(2)).objective
    params = PARAMS.model_copy(update={"reference_bound": optimum})
    solution = solve_heuristic(coordinate_instance, VariantSpec.base(2), params)
    assert solution.metadata.best_bound == optimum
    assert solution.metadata.gap >= -1e-9


def test_structural_infeasibility(toy_instance):
    """Test impossible counts are reported, and refused by the constructor."""
    solution = solve_heuristic(toy_instance, VariantSpec.base(2))
    assert solution.status == SolveStatus.INFEASIBLE
    with pytest.raises(HeuristicError, match="p\\(p-1\\)/2"):
        greedy_construct(toy_instance, VariantSpec.base(2))


def test_greedy_meets_counts(coordinate_instance):
    """Test greedy starts satisfy the counts for every seed."""
    for variant in (VariantSpec.base(2), VariantSpec.pl(2, 1), VariantSpec.min_links(3)):
        for seed in range(4):
            config = greedy_construct(coordinate_instance, variant, seed)
            assert cardinality_problem(variant, config) is None
            assert not config.violations(coordinate_instance.p)


def test_local_search_from_start(coordinate_instance):
    """Test descent never ends worse than its start."""
    variant = VariantSpec.base(1)
    start = Configuration.of([0, 1], [(0, 1)])
    params = HeuristicParams(time_budget=60.0, neighborhood_order=[Neighborhood.SWAP_LINK])
    solution = local_search(coordinate_instance, variant, start, params)
    assert solution.objective <= evaluate_configuration(coordinate_instance, variant, start).objective + 1e-9


def test_repair_adds_links_and_terminals():
    """Test missing links open the best closed terminals."""
    config = repair_configuration(3, VariantSpec.base(2), [0], [])
    assert config == Configuration.of([0, 1, 2], [(0, 1), (0, 2)])


def test_repair_closes_low_scored_terminals():
    """Test surplus terminals are closed with their links."""
    config = repair_configuration(3, VariantSpec.pl(2, 1), [0, 1, 2], [(0, 1), (1, 2)],
                                  terminal_score={0: 5.0, 1: 4.0, 2: 1.0})
    assert config == Configuration.of([0, 1], [(0, 1)])


def test_repair_drops_surplus_links():
    """Test the lowest-scored links go first."""
    config = repair_configuration(3, VariantSpec.base(1, LinkMode.AT_MOST), [], [(0, 1), (1, 2)],
                                  link_score={(0, 1): 1.0, (1, 2): 2.0})
    assert config.links == ((1, 2),)


def test_repair_impossible_counts():
    """Test counts no configuration can meet."""
    with pytest.raises(RepairError):
        repair_configuration(3, VariantSpec.min_links(4), [], [])
    with pytest.raises(RepairError):
        repair_configuration(2, VariantSpec.base(3), [], [])
