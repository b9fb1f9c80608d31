"""Fixing a configuration: substitute the binaries and keep the routing LP."""
import logging
from typing import Dict, List, Tuple

import numpy as np

from models.solution import Configuration
from .model import EquationTag, MipModel, Relation, VarRole

logger = logging.getLogger(__name__)

ROW_TOL = 1e-9


class ConfigurationError(Exception):
    """Raised when a configuration cannot be applied to a model."""
    pass


def _row_holds(relation: Relation, lhs: float, rhs: float) -> bool:
    if relation == Relation.LE:
        return lhs <= rhs + ROW_TOL
    if relation == Relation.GE:
        return lhs >= rhs - ROW_TOL
    return abs(lhs - rhs) <= ROW_TOL


def configuration_vector(model: MipModel, config: Configuration) -> np.ndarray:
    """0/1 values of every z column for ``config``, zeros elsewhere.

    Raises:
        ConfigurationError: If the configuration is inconsistent or names a
            terminal or link the model does not carry
    """
    problems = config.violations(model.p)
    if problems:
        raise ConfigurationError("; ".join(problems))

    values = np.zeros(model.num_variables)
    wanted = [(k, k) for k in config.open_terminals] + list(config.links)
    for key in wanted:
        col = model.z_index.get(key)
        if col is None:
            raise ConfigurationError(f"model has no variable z_{key[0]}_{key[1]} for this configuration")
        values[col] = 1.0
    return values


def fix_configuration(model: MipModel, config: Configuration) -> MipModel:
    """Fix every z to its 0/1 value in ``config`` and return the routing LP.

    The linking rows ``x <= q_ij * z`` turn into upper bounds on x; x columns
    whose bound drops to zero are removed. Rows left with only constants are
    checked and removed. The fixed z costs move into ``objective_offset``.

    Args:
        model: Model from the builders, not yet fixed
        config: Open terminals and links

    Returns:
        A pure LP in x and w

    Raises:
        ConfigurationError: If a link joins a closed terminal, or the
            configuration breaks a link-implies-open or cardinality row
    """
    if model.structurally_infeasible:
        raise ConfigurationError(f"model is structurally infeasible: {model.infeasibility_reason}")

    z_values = configuration_vector(model, config)
    matrix = model.matrix.tocsr()
    rhs = model.rhs - matrix @ z_values
    offset = model.objective_offset + float(model.objective @ z_values)

    upper = model.upper.copy()
    is_z = np.array([role in (VarRole.Z_LINK, VarRole.Z_SITE) for role in model.roles], dtype=bool)
    linking_rows = set()
    for row, tag in enumerate(model.tags):
        if tag != EquationTag.EQ8:
            continue
        start, end = matrix.indptr[row], matrix.indptr[row + 1]
        for col, coef in zip(matrix.indices[start:end], matrix.data[start:end]):
            if not is_z[col] and coef > 0.0:
                upper[col] = min(upper[col], rhs[row] / coef)
        linking_rows.add(row)

    keep = [col for col in range(model.num_variables) if not is_z[col] and upper[col] > 0.0]
    new_index = {old: new for new, old in enumerate(keep)}
    reduced = matrix[:, keep].tocsr()

    rows: List[int] = []
    for row in range(model.num_constraints):
        if row in linking_rows:
            continue
        if reduced.indptr[row + 1] > reduced.indptr[row]:
            rows.append(row)
            continue
        # only constants remain once z is substituted and closed routes are dropped
        if not _row_holds(model.relations[row], 0.0, rhs[row]):
            raise ConfigurationError(
                f"configuration violates {model.tags[row].value} row {model.row_names[row]}"
            )

    x_index: Dict[Tuple[int, int, int, int], int] = {
        route: new_index[col] for route, col in model.x_index.items() if col in new_index
    }
    w_index: Dict[Tuple[int, int], int] = {
        pair: new_index[col] for pair, col in model.w_index.items() if col in new_index
    }
    logger.debug(
        f"Fixed configuration {config.key()}: {len(keep)} of {model.num_variables} columns, "
        f"{len(rows)} of {model.num_constraints} rows kept"
    )
    return MipModel(
        n=model.n,
        p=model.p,
        variant=model.variant,
        pairs=model.pairs,
        names=[model.names[col] for col in keep],
        roles=[model.roles[col] for col in keep],
        lower=model.lower[keep],
        upper=upper[keep],
        integral=np.zeros(len(keep), dtype=bool),
        objective=model.objective[keep],
        matrix=reduced[rows, :].tocsr(),
        relations=[model.relations[row] for row in rows],
        rhs=rhs[rows],
        tags=[model.tags[row] for row in rows],
        row_names=[model.row_names[row] for row in rows],
        x_index=x_index,
        w_index=w_index,
        z_index={},
        objective_offset=offset,
    )
