"""Test the branch-and-bound solver against the enumeration oracle."""
import pytest

from generators import GenSpec, generate, generate_handling_costs
from models.instance import LinkMode, VariantSpec, max_links
from models.solution import BnbParams, Engine, InfeasibilityKind, SolveStatus
from solvers import BranchAndBoundSolver, brute_force, check_solution, evaluate_configuration, solve_bnb
from solvers.oracle import enumerate_configurations


def _variants(p: int, seed: int):
    yield VariantSpec.base(1)
    yield VariantSpec.base(1, LinkMode.AT_MOST)
    yield VariantSpec.min_links(2)
    yield VariantSpec.pl(2, 1)
    yield VariantSpec.pl(2, 0, LinkMode.AT_MOST)
    yield VariantSpec.handling(1, generate_handling_costs(p, seed))
    if p >= 3:
        yield VariantSpec.base(2)
        yield VariantSpec.base(3, LinkMode.AT_MOST)


@pytest.mark.parametrize("variant,expected", [
    (VariantSpec.base(1), 240.0),
    (VariantSpec.base(0), 520.0),
    (VariantSpec.min_links(2), 260.0),
    (VariantSpec.pl(2, 1), 220.0),
    (VariantSpec.handling(1, [[0.0, 3.0], [4.0, 0.0]]), 247.0),
])
def test_toy_optima(toy_instance, variant, expected):
    """Test hand-computed toy optima are proven."""
    solution = solve_bnb(toy_instance, variant)
    assert solution.status == SolveStatus.OPTIMAL
    assert solution.metadata.engine == Engine.EXACT
    assert solution.objective == pytest.approx(expected)
    assert solution.metadata.gap == 0.0
    assert solution.metadata.best_bound == pytest.approx(expected)


def test_tight_capacity(make_toy):
    """Test the capacity row with the doubled diagonal coefficient."""
    solution = solve_bnb(make_toy(capacity=(4.0, 100.0)), VariantSpec.base(1))
    assert solution.objective == pytest.approx(414.0)


def test_agrees_with_oracle(small_instances):
    """Test optimal objectives match brute force on small instances."""
    for index, instance in enumerate(small_instances(6)):
        for variant in _variants(instance.p, index):
            exact = solve_bnb(instance, variant)
            oracle = brute_force(instance, variant)
            assert exact.status == oracle.status, f"{instance.name} {variant.label()}"
            if oracle.objective is not None:
                assert exact.objective == pytest.approx(oracle.objective, rel=1e-6), \
                    f"{instance.name} {variant.label()}"
                assert check_solution(instance, variant, exact).ok


def test_at_most_never_worse_than_exact(coordinate_instance):
    """Test relaxing the link count to an upper bound cannot raise the cost."""
    for l in range(4):
        exact = solve_bnb(coordinate_instance, VariantSpec.base(l))
        relaxed = solve_bnb(coordinate_instance, VariantSpec.base(l, LinkMode.AT_MOST))
        assert relaxed.objective <= exact.objective + 1e-6


def test_handling_with_zero_costs_matches_base(coordinate_instance):
    """Test a zero handling matrix reduces to the base model."""
    zeros = [[0.0] * coordinate_instance.p for _ in range(coordinate_instance.p)]
    handling = solve_bnb(coordinate_instance, VariantSpec.handling(2, zeros))
    base = solve_bnb(coordinate_instance, VariantSpec.base(2))
    assert handling.objective == pytest.approx(base.objective)


def test_structural_infeasibility(toy_instance):
    """Test an impossible link count returns without solving an LP."""
    solution = solve_bnb(toy_instance, VariantSpec.base(2))
    assert solution.status == SolveStatus.INFEASIBLE
    assert solution.metadata.infeasibility == InfeasibilityKind.STRUCTURAL
    assert solution.metadata.lp_count == 0
    assert "p(p-1)/2" in solution.metadata.message


def test_root_bound_is_valid(coordinate_instance):
    """Test the root relaxation bounds the optimum from below."""
    solver = BranchAndBoundSolver(coordinate_instance, VariantSpec.base(2))
    solution = solver.solve()
    root = solver.node_log[0]
    assert root.depth == 0
    assert root.fixings == {}
    assert root.bound <= solution.objective + 1e-6
    assert solution.metadata.node_count >= 1
    assert solution.metadata.lp_count >= solution.metadata.node_count


def _respects(config, fixings, keys) -> bool:
    opened = set(config.open_terminals)
    links = set(config.links)
    for col, value in fixings.items():
        k, m = keys[col]
        present = k in opened if k == m else (k, m) in links
        if present != bool(value):
            return False
    return True


@pytest.mark.parametrize("variant", [
    VariantSpec.base(2),
    VariantSpec.base(1, LinkMode.AT_MOST),
    VariantSpec.pl(2, 1),
    VariantSpec.min_links(2),
])
def test_every_node_bound_is_valid(coordinate_instance, variant):
    """Test each logged node bound is below the best configuration its fixings allow."""
    solver = BranchAndBoundSolver(coordinate_instance, variant, BnbParams(incumbent_heuristic=False))
    solver.solve()
    keys = {col: key for key, col in solver.model.z_index.items()}
    objectives = {
        config: evaluate_configuration(coordinate_instance, variant, config).objective
        for config in enumerate_configurations(coordinate_instance.p, variant)
    }
    checked = 0
    for record in solver.node_log:
        allowed = [value for config, value in objectives.items()
                   if value is not None and _respects(config, record.fixings, keys)]
        if not allowed:
            continue
        best = min(allowed)
        assert record.bound <= best + 1e-6 * max(1.0, abs(best)), f"node {record.node_id} {record.fixings}"
        checked += 1
    assert checked >= 1


def test_spent_time_limit_returns_before_any_lp(coordinate_instance):
    """Test a time limit that passes while the model is built stops without solving LPs."""
    solution = solve_bnb(coordinate_instance, VariantSpec.base(2), BnbParams(time_limit=1e-9))
    assert solution.status == SolveStatus.TIME_LIMIT
    assert solution.objective is None
    assert solution.metadata.node_count == 0
    assert solution.metadata.lp_count == 0
    assert solution.metadata.message.startswith("time limit")


def test_forced_link_can_raise_the_cost(make_toy):
    """Test exact mode may cost more with one more link when terminals are expensive."""
    toy = make_toy(fixed_cost=(300.0, 300.0))
    none = solve_bnb(toy, VariantSpec.base(0))
    one = solve_bnb(toy, VariantSpec.base(1))
    assert none.objective == pytest.approx(810.0)
    assert one.objective == pytest.approx(820.0)
    assert solve_bnb(toy, VariantSpec.base(1, LinkMode.AT_MOST)).objective == pytest.approx(810.0)


def test_node_limit(coordinate_instance):
    """Test a node limit stops the search with a consistent status."""
    solution = solve_bnb(coordinate_instance, VariantSpec.base(2), BnbParams(node_limit=1))
    assert solution.status in (SolveStatus.OPTIMAL, SolveStatus.FEASIBLE, SolveStatus.TIME_LIMIT)
    if solution.status == SolveStatus.FEASIBLE:
        assert solution.metadata.best_bound <= solution.objective + 1e-6
        assert solution.metadata.message == "node limit"


def test_without_rounding_heuristic(coordinate_instance):
    """Test the search still proves optimality from integral leaves alone."""
    plain = solve_bnb(coordinate_instance, VariantSpec.base(2), BnbParams(incumbent_heuristic=False))
    assisted = solve_bnb(coordinate_instance, VariantSpec.base(2))
    assert plain.status == SolveStatus.OPTIMAL
    assert plain.objective == pytest.approx(assisted.objective)


def test_prop1_holds_at_optimum(coordinate_instance):
    """Test Euclidean optima route nothing through a single terminal."""
    solution = solve_bnb(coordinate_instance, VariantSpec.base(2))
    report = check_solution(coordinate_instance, VariantSpec.base(2), solution)
    assert report.prop1_checked
    assert report.prop1_ok
    assert report.ok


def test_complete_network_with_free_terminals(coordinate_instance):
    """Test q = p and every link reduces to the complete network, which no other network beats."""
    p = coordinate_instance.p
    complete = solve_bnb(coordinate_instance, VariantSpec.pl(p, max_links(p)))
    assert complete.configuration.num_links == max_links(p)
    assert complete.configuration.num_open == p
    for l in range(max_links(p)):
        partial = brute_force(coordinate_instance, VariantSpec.pl(p, l))
        assert complete.objective <= partial.objective + 1e-6
