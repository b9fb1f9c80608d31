"""Test model building, configuration fixing and model statistics."""
import pytest

from formulation import (
    ConfigurationError, EquationTag, Relation, VarRole, build_base, build_handling, build_min_links,
    build_model, build_pl, configuration_vector, fix_configuration, link_cost_coefficients, model_stats,
    closed_form_counts,
)
from generators import LpExporter, export_lp
from models.instance import LinkMode, VariantError, VariantSpec
from models.solution import Configuration


def test_toy_base_model_shape(toy_instance):
    """Test variable and row counts of the full toy model."""
    model = build_base(toy_instance, 1)
    assert model.num_variables == 8
    assert model.num_binaries == 3
    assert model.num_constraints == 10
    assert model.names[:4] == ["z_0_0", "z_1_1", "z_0_1", "w_0_1"]
    assert set(model.names[4:]) == {"x_0_1_0_0", "x_0_1_0_1", "x_0_1_1_0", "x_0_1_1_1"}
    stats = model_stats(model)
    assert stats.constraints_by_tag == {"Eq2": 1, "Eq3": 2, "Eq4": 1, "Eq5": 1, "Eq7": 1, "Eq8": 4}
    assert stats.variables_by_role == {"z_kk": 2, "z_km": 1, "w_ij": 1, "x_ijkm": 4}


def test_objective_coefficients(toy_instance):
    """Test route, road and fixed-cost coefficients."""
    model = build_base(toy_instance, 1)
    cost = dict(zip(model.names, model.objective))
    assert cost["x_0_1_0_1"] == 22.0
    assert cost["x_0_1_0_0"] == 51.0
    assert cost["x_0_1_1_0"] == 120.0
    assert cost["w_0_1"] == 100.0
    assert cost["z_0_0"] == 10.0
    assert cost["z_0_1"] == 0.0


def test_diagonal_route_counts_twice_in_capacity(toy_instance):
    """Test x_ij^kk uses terminal k at both ends of its rail leg."""
    model = build_base(toy_instance, 1)
    matrix = model.matrix.toarray()
    row = model.row_names.index("Eq3_0")
    assert matrix[row, model.column("x_0_1_0_0")] == 2.0
    assert matrix[row, model.column("x_0_1_0_1")] == 1.0
    assert matrix[row, model.column("x_0_1_1_1")] == 0.0
    assert matrix[row, model.column("z_0_0")] == -100.0


def test_linking_rows_use_demand(toy_instance):
    """Test x <= q_ij z with the link variable of the unordered pair."""
    model = build_base(toy_instance, 1)
    matrix = model.matrix.toarray()
    row = model.row_names.index("Eq8_0_1_1_0")
    assert model.tags[row] == EquationTag.EQ8
    assert matrix[row, model.column("x_0_1_1_0")] == 1.0
    assert matrix[row, model.column("z_0_1")] == -10.0
    assert model.relations[row] == Relation.LE


def test_link_mode_relation(toy_instance):
    """Test the link-count row is an equality or an upper bound."""
    exact = build_base(toy_instance, 1)
    atmost = build_base(toy_instance, 1, LinkMode.AT_MOST)
    assert exact.relations[exact.row_names.index("Eq7")] == Relation.EQ
    assert atmost.relations[atmost.row_names.index("Eq7")] == Relation.LE


def test_variant_objectives(toy_instance):
    """Test fixed and link costs per variant."""
    min_links = build_min_links(toy_instance, 2)
    cost = dict(zip(min_links.names, min_links.objective))
    assert cost["z_0_0"] == 0.0
    assert cost["z_0_1"] == 40.0
    assert "Eq10" in min_links.row_names
    assert "Eq7" not in min_links.row_names

    handling = build_handling(toy_instance, 1, [[0.0, 3.0], [4.0, 0.0]])
    cost = dict(zip(handling.names, handling.objective))
    assert cost["z_0_1"] == 7.0
    assert cost["z_1_1"] == 10.0

    pl = build_pl(toy_instance, 2, 1)
    assert all(pl.objective[col] == 0.0 for col in pl.z_columns())
    assert {"Eq7", "Eq10"} <= set(pl.row_names)


def test_handling_requires_matrix(toy_instance):
    """Test the handling builder refuses a missing t."""
    with pytest.raises(VariantError):
        build_handling(toy_instance, 1, None)


def test_terminal_count_above_p(toy_instance):
    """Test q above p is a variant error."""
    with pytest.raises(VariantError):
        build_pl(toy_instance, 3, 1)
    with pytest.raises(VariantError):
        build_min_links(toy_instance, 3)


def test_link_cost_coefficients(toy_instance):
    """Test per-link objective coefficients."""
    arrays = toy_instance.to_arrays()
    assert link_cost_coefficients(arrays, VariantSpec.min_links(2)) == {(0, 1): 40.0}
    assert link_cost_coefficients(arrays, VariantSpec.base(1)) == {(0, 1): 0.0}


def test_structural_infeasibility_short_circuits(toy_instance):
    """Test an impossible link count builds an empty flagged model."""
    model = build_base(toy_instance, 2)
    assert model.structurally_infeasible
    assert model.num_variables == 0
    assert "p(p-1)/2 = 1" in model.infeasibility_reason
    with pytest.raises(ConfigurationError, match="structurally infeasible"):
        fix_configuration(model, Configuration.of([0, 1], [(0, 1)]))


def test_zero_demand_pairs_dropped(coordinate_instance):
    """Test only positive-demand pairs get variables."""
    model = build_base(coordinate_instance, 1)
    arrays = coordinate_instance.to_arrays()
    pairs = arrays.demand_pairs()
    assert model.pairs == pairs
    assert len(model.w_index) == len(pairs)
    assert len(model.x_index) == len(pairs) * arrays.p * arrays.p


def test_restricted_model(toy_instance):
    """Test a configuration-restricted build only carries its own z."""
    config = Configuration.of([0], [])
    model = build_model(toy_instance, VariantSpec.base(0), restrict_to=config)
    assert set(model.z_index) == {(0, 0)}
    assert set(model.x_index) == {(0, 1, 0, 0)}


def test_fix_configuration(toy_instance):
    """Test fixing turns linking rows into bounds and moves z costs to the offset."""
    model = build_base(toy_instance, 1)
    fixed = fix_configuration(model, Configuration.of([0, 1], [(0, 1)]))
    assert fixed.is_pure_lp
    assert fixed.objective_offset == 20.0
    assert EquationTag.EQ8 not in fixed.tags
    assert EquationTag.EQ7 not in fixed.tags
    assert len(fixed.x_index) == 4
    assert all(fixed.upper[col] == 10.0 for col in fixed.x_index.values())
    assert all(role in (VarRole.X, VarRole.W) for role in fixed.roles)


def test_fix_configuration_drops_closed_routes(toy_instance):
    """Test routes through missing links or closed terminals disappear."""
    model = build_base(toy_instance, 0)
    fixed = fix_configuration(model, Configuration.of([0], []))
    assert set(fixed.x_index) == {(0, 1, 0, 0)}
    assert fixed.objective_offset == 10.0


def test_fix_configuration_errors(toy_instance):
    """Test inconsistent or count-breaking configurations are refused."""
    model = build_base(toy_instance, 1)
    with pytest.raises(ConfigurationError, match="closed terminal"):
        fix_configuration(model, Configuration.of([0], [(0, 1)]))
    with pytest.raises(ConfigurationError, match="Eq7"):
        fix_configuration(model, Configuration.of([0, 1], []))


def test_configuration_vector(toy_instance):
    """Test z values of a configuration."""
    model = build_base(toy_instance, 1)
    values = configuration_vector(model, Configuration.of([0, 1], [(0, 1)]))
    assert values.sum() == 3.0
    assert values[model.column("z_0_1")] == 1.0


@pytest.mark.parametrize("n", range(1, 21))
def test_closed_form_counts(n):
    """Test the literal counting scheme matches both closed-form totals."""
    for p in range(1, 21):
        stats = closed_form_counts(n, p, VariantSpec.base(0))
        assert stats.num_constraints == n * n * p * p + 3 * p * p + n * n + p + 1
        assert stats.num_variables == n * n * p * p + n * n + p * p
        assert stats.num_binaries == p * p
        assert stats.closed_form


def test_model_stats_closed_form_flag(toy_instance):
    """Test model_stats can report the closed-form counts of a built model."""
    stats = model_stats(build_base(toy_instance, 1), closed_form=True)
    assert stats.num_constraints == 35
    assert stats.num_variables == 24


def test_lp_export(toy_instance, temp_dir):
    """Test the LP text carries every section and canonical names."""
    model = build_base(toy_instance, 1)
    text = export_lp(model)
    for section in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
        assert section in text
    assert "Eq2_0_1:" in text
    assert "+ 22 x_0_1_0_1" in text
    assert "z_0_0 z_1_1 z_0_1" in text
    assert "0 <= w_0_1 <= 10" in text
    assert text.rstrip().endswith("End")

    result = LpExporter().export(model, temp_dir / "toy.lp")
    assert result["success"]
    assert (temp_dir / "toy.lp").read_text(encoding="utf-8") == text


def test_lp_export_structurally_infeasible(toy_instance):
    """Test an empty model still renders with its reason in the title."""
    text = export_lp(build_base(toy_instance, 2))
    assert "structurally infeasible" in text
    assert "obj: 0" in text
