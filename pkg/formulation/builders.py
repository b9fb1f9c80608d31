"""Builders for the four model variants.

All variants share the routing core: demand balance, terminal capacity,
link-implies-open and flow-on-established-links rows. They differ in the
objective (fixed costs, link costs, handling costs) and in the cardinality
rows (link count, terminal count).

Representation choices:

* one binary ``z_k_m`` per unordered site pair ``k < m`` plus ``z_k_k`` per
  site, so link symmetry holds by construction and is never a row;
* the link-count row sums only the off-diagonal ``z_k_m``;
* the flow-linking row is ``x_ijkm <= q_ij * z`` where ``z`` is the link
  variable of ``{k, m}`` (or ``z_k_k`` when ``k == m``); q_ij is the tightest
  valid big-M because demand balance caps the flow of a pair at q_ij;
* customer pairs with zero demand get no variables and no rows.
"""
import logging
from typing import Dict, Optional, Sequence, Tuple

from models.instance import (
    CostArrays, Instance, LinkMode, VariantError, VariantKind, VariantSpec,
)
from models.solution import Configuration
from .model import EquationTag, MipModel, ModelBuilder, Relation, VarRole, empty_infeasible_model

logger = logging.getLogger(__name__)


def link_cost_coefficients(arrays: CostArrays, variant: VariantSpec) -> Dict[Tuple[int, int], float]:
    """Objective coefficient of each link variable z_k_m, k < m.

    Min-links charges the undiscounted inter-terminal cost c_km once per
    link; handling charges t_km + t_mk once per link; base and (p,l) charge
    nothing.
    """
    coefficients = {}
    t = variant.handling_cost
    for k in range(arrays.p):
        for m in range(k + 1, arrays.p):
            if variant.kind == VariantKind.MIN_LINKS:
                coefficients[(k, m)] = float(arrays.inter[k, m])
            elif variant.kind == VariantKind.HANDLING:
                coefficients[(k, m)] = float(t[k][m] + t[m][k])
            else:
                coefficients[(k, m)] = 0.0
    return coefficients


def site_cost_coefficients(arrays: CostArrays, variant: VariantSpec) -> Dict[int, float]:
    """Objective coefficient of each site variable z_k_k."""
    if variant.charges_fixed_cost:
        return {k: float(arrays.fixed_cost[k]) for k in range(arrays.p)}
    return {k: 0.0 for k in range(arrays.p)}


def build_model(instance: Instance, variant: VariantSpec,
                restrict_to: Optional[Configuration] = None) -> MipModel:
    """Build the model of any variant.

    Args:
        instance: Problem data
        variant: Variant and its parameters
        restrict_to: When given, only the z variables of this configuration
            (its open terminals, its links and their endpoints) are created,
            together with the x variables they can carry. All omitted z are
            implicitly zero. Used to evaluate one configuration cheaply.

    Returns:
        The model, or an empty model flagged structurally infeasible

    Raises:
        VariantError: If the variant does not fit the instance
    """
    variant.check_against(instance)
    reason = variant.structural_infeasibility(instance.p)
    if reason is not None:
        logger.info(f"Structurally infeasible ({variant.label()}): {reason}")
        return empty_infeasible_model(instance.n, instance.p, variant, reason)

    arrays = instance.to_arrays()
    n, p = arrays.n, arrays.p
    pairs = arrays.demand_pairs()

    if restrict_to is None:
        sites = list(range(p))
        links = [(k, m) for k in range(p) for m in range(k + 1, p)]
    else:
        endpoints = {end for link in restrict_to.links for end in link}
        sites = sorted((set(restrict_to.open_terminals) | endpoints) & set(range(p)))
        links = [link for link in restrict_to.links if link[0] in sites and link[1] in sites]

    builder = ModelBuilder(n, p, variant)
    site_costs = site_cost_coefficients(arrays, variant)
    link_costs = link_cost_coefficients(arrays, variant)

    z_index: Dict[Tuple[int, int], int] = {}
    for k in sites:
        z_index[(k, k)] = builder.add_variable(
            f"z_{k}_{k}", VarRole.Z_SITE, 0.0, 1.0, site_costs[k], integral=True)
    for k, m in links:
        z_index[(k, m)] = builder.add_variable(
            f"z_{k}_{m}", VarRole.Z_LINK, 0.0, 1.0, link_costs[(k, m)], integral=True)

    w_index: Dict[Tuple[int, int], int] = {}
    for i, j in pairs:
        q_ij = float(arrays.demand[i, j])
        w_index[(i, j)] = builder.add_variable(
            f"w_{i}_{j}", VarRole.W, 0.0, q_ij, float(arrays.road[i, j]))

    route_costs = arrays.route_costs(pairs)
    x_index: Dict[Tuple[int, int, int, int], int] = {}
    for r, (i, j) in enumerate(pairs):
        q_ij = float(arrays.demand[i, j])
        for k in sites:
            for m in sites:
                if (min(k, m), max(k, m)) not in z_index:
                    continue
                x_index[(i, j, k, m)] = builder.add_variable(
                    f"x_{i}_{j}_{k}_{m}", VarRole.X, 0.0, q_ij, float(route_costs[r, k, m]))

    _add_routing_rows(builder, arrays, pairs, sites, x_index, w_index, z_index)
    _add_link_rows(builder, links, z_index)
    _add_cardinality_rows(builder, variant, sites, links, z_index)
    _add_linking_rows(builder, arrays, x_index, z_index)

    model = builder.build(pairs, x_index, w_index, z_index)
    logger.info(
        f"Built {variant.label()} model: {model.num_variables} variables "
        f"({model.num_binaries} binary), {model.num_constraints} constraints"
    )
    return model


def _add_routing_rows(builder, arrays, pairs, sites, x_index, w_index, z_index) -> None:
    by_pair = {pair: [] for pair in pairs}
    throughput = {k: [] for k in sites}
    for (i, j, k, m), col in x_index.items():
        by_pair[(i, j)].append(col)
        throughput[k].append(col)
        throughput[m].append(col)

    for i, j in pairs:
        terms = [(col, 1.0) for col in by_pair[(i, j)]] + [(w_index[(i, j)], 1.0)]
        builder.add_row(f"Eq2_{i}_{j}", EquationTag.EQ2, terms, Relation.EQ, float(arrays.demand[i, j]))

    for k in sites:
        terms = [(col, 1.0) for col in throughput[k]]
        terms.append((z_index[(k, k)], -float(arrays.capacity[k])))
        builder.add_row(f"Eq3_{k}", EquationTag.EQ3, terms, Relation.LE, 0.0)


def _add_link_rows(builder, links, z_index) -> None:
    for k, m in links:
        builder.add_row(f"Eq4_{k}_{m}", EquationTag.EQ4,
                        [(z_index[(k, m)], 1.0), (z_index[(k, k)], -1.0)], Relation.LE, 0.0)
    for k, m in links:
        builder.add_row(f"Eq5_{k}_{m}", EquationTag.EQ5,
                        [(z_index[(k, m)], 1.0), (z_index[(m, m)], -1.0)], Relation.LE, 0.0)


def _add_cardinality_rows(builder, variant: VariantSpec, sites, links, z_index) -> None:
    if variant.has_link_count:
        relation = Relation.EQ if variant.link_mode == LinkMode.EXACT else Relation.LE
        terms = [(z_index[link], 1.0) for link in links]
        builder.add_row("Eq7", EquationTag.EQ7, terms, relation, float(variant.l))
    if variant.has_terminal_count:
        terms = [(z_index[(k, k)], 1.0) for k in sites]
        builder.add_row("Eq10", EquationTag.EQ10, terms, Relation.EQ, float(variant.q_terminals))


def _add_linking_rows(builder, arrays, x_index, z_index) -> None:
    for (i, j, k, m), col in x_index.items():
        z_col = z_index[(min(k, m), max(k, m))]
        builder.add_row(f"Eq8_{i}_{j}_{k}_{m}", EquationTag.EQ8,
                        [(col, 1.0), (z_col, -float(arrays.demand[i, j]))], Relation.LE, 0.0)


def build_base(instance: Instance, l: int, mode: LinkMode = LinkMode.EXACT) -> MipModel:
    """Base model: routing + fixed costs, exactly (or at most) l links."""
    return build_model(instance, VariantSpec.base(l, mode))


def build_min_links(instance: Instance, q_terminals: int) -> MipModel:
    """Min-links model: routing + link costs c_km, exactly q open terminals.

    Opening costs are not charged, matching the variant's objective as
    published.
    """
    if q_terminals > instance.p:
        raise VariantError(f"q_terminals={q_terminals} exceeds the {instance.p} candidate sites")
    return build_model(instance, VariantSpec.min_links(q_terminals))


def build_handling(instance: Instance, l: int, handling_cost: Optional[Sequence[Sequence[float]]],
                   mode: LinkMode = LinkMode.EXACT) -> MipModel:
    """Handling model: base model plus (t_km + t_mk) per established link."""
    if handling_cost is None:
        raise VariantError("the handling variant requires a handling-cost matrix")
    return build_model(instance, VariantSpec.handling(l, handling_cost, mode))


def build_pl(instance: Instance, q_terminals: int, l: int,
             mode: LinkMode = LinkMode.EXACT) -> MipModel:
    """(p,l) model: routing costs only, q open terminals and l links."""
    if q_terminals > instance.p:
        raise VariantError(f"q_terminals={q_terminals} exceeds the {instance.p} candidate sites")
    return build_model(instance, VariantSpec.pl(q_terminals, l, mode))
