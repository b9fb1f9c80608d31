"""Test the independent solution checker."""
import pytest

from models.instance import LinkMode, VariantSpec
from models.solution import Configuration, FlowEntry
from solvers import brute_force, check_solution, evaluate_configuration

BASE_ONE_LINK = VariantSpec.base(1)


@pytest.fixture
def toy_solution(toy_instance):
    """Optimal toy solution for one link."""
    return brute_force(toy_instance, BASE_ONE_LINK)


def test_valid_solution(toy_instance, toy_solution):
    """Test an optimal solution has no violations and a matching objective."""
    report = check_solution(toy_instance, BASE_ONE_LINK, toy_solution)
    assert report.ok
    assert all(value == pytest.approx(0.0, abs=1e-9) for value in report.residuals.values())
    assert report.objective_ok
    assert report.objective_recomputed == pytest.approx(240.0)
    assert not report.prop1_checked


def test_unmet_demand(toy_instance, toy_solution):
    """Test a short flow breaks the demand balance."""
    flows = [toy_solution.intermodal_flows[0].model_copy(update={"amount": 5.0})]
    tampered = toy_solution.model_copy(update={"intermodal_flows": flows})
    report = check_solution(toy_instance, BASE_ONE_LINK, tampered)
    assert not report.ok
    assert report.residuals["Eq2"] == pytest.approx(5.0)
    assert any(v.startswith("Eq2") for v in report.violations)
    assert report.worst_location["Eq2"] == "pair (0, 1)"


def test_objective_mismatch(toy_instance, toy_solution):
    """Test a misreported objective is caught."""
    tampered = toy_solution.model_copy(update={"objective": 250.0})
    report = check_solution(toy_instance, BASE_ONE_LINK, tampered)
    assert not report.objective_ok
    assert any("differs from recomputed" in v for v in report.violations)


def test_flow_without_link(toy_instance, toy_solution):
    """Test flow over a link that was never established."""
    tampered = toy_solution.model_copy(update={"configuration": Configuration.of([0, 1], [])})
    report = check_solution(toy_instance, BASE_ONE_LINK, tampered)
    assert report.residuals["Eq8"] == pytest.approx(10.0)
    assert report.residuals["Eq7"] == 1.0


def test_link_to_closed_terminal(toy_instance, toy_solution):
    """Test a configuration linking a closed terminal."""
    tampered = toy_solution.model_copy(update={"configuration": Configuration.of([0], [(0, 1)])})
    report = check_solution(toy_instance, BASE_ONE_LINK, tampered)
    assert any("closed terminal 1" in v for v in report.violations)
    assert report.residuals["Eq3"] == pytest.approx(10.0)


def test_capacity_exceeded(make_toy, toy_solution):
    """Test flow above a terminal's capacity."""
    report = check_solution(make_toy(capacity=(4.0, 100.0)), BASE_ONE_LINK, toy_solution)
    assert report.residuals["Eq3"] == pytest.approx(6.0)
    assert report.worst_location["Eq3"] == "terminal 0"


def test_at_most_link_count(toy_instance, toy_solution):
    """Test an upper-bounded link count only counts excess links."""
    assert check_solution(toy_instance, VariantSpec.base(2, LinkMode.AT_MOST), toy_solution).ok
    report = check_solution(toy_instance, VariantSpec.base(0), toy_solution)
    assert report.residuals["Eq7"] == 1.0


def test_out_of_range_indices(toy_instance, toy_solution):
    """Test bad indices are reported and stop the objective recomputation."""
    flows = [FlowEntry(i=0, j=5, k=0, m=1, amount=1.0)] + list(toy_solution.intermodal_flows)
    tampered = toy_solution.model_copy(update={"intermodal_flows": flows})
    report = check_solution(toy_instance, BASE_ONE_LINK, tampered)
    assert report.objective_recomputed is None
    assert any("out of range" in v for v in report.violations)


def test_solution_without_objective(toy_instance):
    """Test infeasible solutions produce an empty report."""
    solution = brute_force(toy_instance, VariantSpec.base(2))
    assert check_solution(toy_instance, VariantSpec.base(2), solution).ok


def test_prop1_violation(coordinate_instance):
    """Test diagonal routes on a Euclidean instance are flagged."""
    variant = VariantSpec.base(0)
    solution = evaluate_configuration(coordinate_instance, variant, Configuration.of([0], []))
    report = check_solution(coordinate_instance, variant, solution)
    assert report.prop1_checked
    assert report.prop1_ok

    first = solution.road_flows[0]
    diagonal = FlowEntry(i=first.i, j=first.j, k=0, m=0, amount=first.amount)
    tampered = solution.model_copy(update={
        "intermodal_flows": list(solution.intermodal_flows) + [diagonal],
        "road_flows": solution.road_flows[1:],
    })
    report = check_solution(coordinate_instance, variant, tampered)
    assert report.prop1_ok is False
    assert report.diagonal_flow == pytest.approx(first.amount)
    assert any(v.startswith("Prop1") for v in report.violations)
