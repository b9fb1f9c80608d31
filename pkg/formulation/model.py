"""Solver-agnostic mixed 0-1 linear model.

A ``MipModel`` is a plain container: variable bounds, integrality and role
tags, a sparse constraint matrix whose rows carry a relation and an equation
tag, and a minimization objective. Models are never mutated once built;
operations such as fixing a configuration return a new model.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from models.instance import VariantSpec

logger = logging.getLogger(__name__)


class VarRole(str, Enum):
    """Role of a model variable."""
    X = "x_ijkm"
    W = "w_ij"
    Z_LINK = "z_km"
    Z_SITE = "z_kk"


class EquationTag(str, Enum):
    """Provenance of a constraint row."""
    EQ2 = "Eq2"    # demand balance
    EQ3 = "Eq3"    # terminal capacity
    EQ4 = "Eq4"    # link implies open (first endpoint)
    EQ5 = "Eq5"    # link implies open (second endpoint)
    EQ6 = "Eq6"    # link symmetry, only ever counted
    EQ7 = "Eq7"    # link count
    EQ8 = "Eq8"    # flow only on established links
    EQ10 = "Eq10"  # terminal count


class Relation(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


@dataclass(frozen=True)
class MipModel:
    """Sparse linear model with binary and continuous variables."""
    n: int
    p: int
    variant: VariantSpec
    pairs: List[Tuple[int, int]]
    names: List[str]
    roles: List[VarRole]
    lower: np.ndarray
    upper: np.ndarray
    integral: np.ndarray
    objective: np.ndarray
    matrix: sp.csr_matrix
    relations: List[Relation]
    rhs: np.ndarray
    tags: List[EquationTag]
    row_names: List[str]
    x_index: Dict[Tuple[int, int, int, int], int] = field(default_factory=dict)
    w_index: Dict[Tuple[int, int], int] = field(default_factory=dict)
    z_index: Dict[Tuple[int, int], int] = field(default_factory=dict)
    objective_offset: float = 0.0
    structurally_infeasible: bool = False
    infeasibility_reason: Optional[str] = None

    @property
    def num_variables(self) -> int:
        return len(self.names)

    @property
    def num_constraints(self) -> int:
        return len(self.relations)

    @property
    def num_binaries(self) -> int:
        return int(np.count_nonzero(self.integral))

    @property
    def is_pure_lp(self) -> bool:
        return self.num_binaries == 0

    def z_columns(self) -> List[int]:
        """Columns of the binary z variables, in index order."""
        return sorted(self.z_index.values())

    def column(self, name: str) -> int:
        """Column index of a named variable."""
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no variable named {name}") from None


class ModelBuilder:
    """Accumulates variables and rows, then freezes them into a MipModel."""

    def __init__(self, n: int, p: int, variant: VariantSpec):
        self.n = n
        self.p = p
        self.variant = variant
        self.names: List[str] = []
        self.roles: List[VarRole] = []
        self.lower: List[float] = []
        self.upper: List[float] = []
        self.integral: List[bool] = []
        self.costs: List[float] = []
        self.row_ids: List[int] = []
        self.col_ids: List[int] = []
        self.values: List[float] = []
        self.relations: List[Relation] = []
        self.rhs: List[float] = []
        self.tags: List[EquationTag] = []
        self.row_names: List[str] = []

    def add_variable(self, name: str, role: VarRole, lower: float, upper: float,
                     cost: float, integral: bool = False) -> int:
        """Append a variable and return its column."""
        self.names.append(name)
        self.roles.append(role)
        self.lower.append(lower)
        self.upper.append(upper)
        self.costs.append(cost)
        self.integral.append(integral)
        return len(self.names) - 1

    def add_row(self, name: str, tag: EquationTag, terms: Iterable[Tuple[int, float]],
                relation: Relation, rhs: float) -> int:
        """Append a constraint row ``sum(coef * var) relation rhs``."""
        row = len(self.relations)
        for col, coef in terms:
            if coef != 0.0:
                self.row_ids.append(row)
                self.col_ids.append(col)
                self.values.append(coef)
        self.relations.append(relation)
        self.rhs.append(rhs)
        self.tags.append(tag)
        self.row_names.append(name)
        return row

    def build(self, pairs: List[Tuple[int, int]], x_index, w_index, z_index,
              objective_offset: float = 0.0) -> MipModel:
        num_rows, num_cols = len(self.relations), len(self.names)
        matrix = sp.csr_matrix(
            (self.values, (self.row_ids, self.col_ids)), shape=(num_rows, num_cols)
        )
        # duplicate (row, col) entries are summed, which Eq3 relies on for x_ij^kk
        matrix.sum_duplicates()
        logger.debug(f"Built model: {num_rows} rows, {num_cols} columns, {matrix.nnz} nonzeros")
        return MipModel(
            n=self.n,
            p=self.p,
            variant=self.variant,
            pairs=pairs,
            names=self.names,
            roles=self.roles,
            lower=np.array(self.lower, dtype=float),
            upper=np.array(self.upper, dtype=float),
            integral=np.array(self.integral, dtype=bool),
            objective=np.array(self.costs, dtype=float),
            matrix=matrix,
            relations=self.relations,
            rhs=np.array(self.rhs, dtype=float),
            tags=self.tags,
            row_names=self.row_names,
            x_index=x_index,
            w_index=w_index,
            z_index=z_index,
            objective_offset=objective_offset,
        )


def empty_infeasible_model(n: int, p: int, variant: VariantSpec, reason: str) -> MipModel:
    """Model flagged structurally infeasible, with no variables or rows."""
    return MipModel(
        n=n,
        p=p,
        variant=variant,
        pairs=[],
        names=[],
        roles=[],
        lower=np.zeros(0),
        upper=np.zeros(0),
        integral=np.zeros(0, dtype=bool),
        objective=np.zeros(0),
        matrix=sp.csr_matrix((0, 0)),
        relations=[],
        rhs=np.zeros(0),
        tags=[],
        row_names=[],
        structurally_infeasible=True,
        infeasibility_reason=reason,
    )
