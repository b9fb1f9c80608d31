"""Linear programs with bounded variables and their solutions."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from formulation.model import MipModel, Relation

logger = logging.getLogger(__name__)


DEFAULT_ITER_LIMIT = 100_000


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"
    TIME_LIMIT = "TimeLimit"


class LpTolerances(BaseModel):
    """Numerical tolerances of the simplex engine."""
    feas_tol: float = Field(1e-7, gt=0.0, description="Primal feasibility")
    opt_tol: float = Field(1e-7, gt=0.0, description="Reduced-cost optimality")
    pivot_tol: float = Field(1e-9, gt=0.0, description="Smallest acceptable pivot magnitude")


DEFAULT_TOLERANCES = LpTolerances()


@dataclass(frozen=True)
class LpProblem:
    """min c'x + offset  s.t.  A x (<=|=|>=) b,  lower <= x <= upper.

    Lower bounds must be finite; upper bounds may be +inf.
    """
    matrix: sp.csr_matrix
    relations: List[Relation]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    offset: float = 0.0
    names: Optional[List[str]] = None

    def __post_init__(self):
        rows, cols = self.matrix.shape
        if len(self.relations) != rows or len(self.rhs) != rows:
            raise ValueError(f"matrix has {rows} rows but {len(self.relations)} relations and {len(self.rhs)} rhs")
        for label, vector in (("lower", self.lower), ("upper", self.upper), ("objective", self.objective)):
            if len(vector) != cols:
                raise ValueError(f"{label} has {len(vector)} entries, expected {cols}")
        if not np.all(np.isfinite(self.lower)):
            raise ValueError("lower bounds must be finite")
        if np.any(self.lower > self.upper):
            col = int(np.argmax(self.lower > self.upper))
            raise ValueError(f"lower bound exceeds upper bound at column {col}")
        if not (np.all(np.isfinite(self.rhs)) and np.all(np.isfinite(self.objective))):
            raise ValueError("rhs and objective must be finite")

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_cols(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def from_dense(cls, matrix: Sequence[Sequence[float]], relations: Sequence, rhs: Sequence[float],
                   objective: Sequence[float], lower: Optional[Sequence[float]] = None,
                   upper: Optional[Sequence[float]] = None) -> "LpProblem":
        """Convenience constructor; bounds default to [0, inf)."""
        objective = np.asarray(objective, dtype=float)
        cols = len(objective)
        dense = np.asarray(matrix, dtype=float).reshape(-1, cols)
        return cls(
            matrix=sp.csr_matrix(dense),
            relations=[Relation(r) for r in relations],
            rhs=np.asarray(rhs, dtype=float).reshape(-1),
            lower=np.zeros(cols) if lower is None else np.asarray(lower, dtype=float),
            upper=np.full(cols, np.inf) if upper is None else np.asarray(upper, dtype=float),
            objective=objective,
        )

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def max_violation(self, x: np.ndarray) -> float:
        """Largest bound or row violation of ``x``."""
        activity = self.row_activity(x)
        worst = 0.0
        for relation, lhs, rhs in zip(self.relations, activity, self.rhs):
            if relation == Relation.LE:
                worst = max(worst, lhs - rhs)
            elif relation == Relation.GE:
                worst = max(worst, rhs - lhs)
            else:
                worst = max(worst, abs(lhs - rhs))
        if len(x):
            worst = max(worst, float(np.max(self.lower - x)), float(np.max(x - self.upper)))
        return worst


@dataclass
class LpSolution:
    """Result of one LP solve."""
    status: LpStatus
    objective: Optional[float] = None
    x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    dual_objective: Optional[float] = None
    message: Optional[str] = None

    @property
    def optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def to_lp_problem(model: MipModel) -> LpProblem:
    """LP relaxation of a model: integrality dropped, bounds and rows kept."""
    return LpProblem(
        matrix=model.matrix.tocsr(),
        relations=list(model.relations),
        rhs=model.rhs.copy(),
        lower=model.lower.copy(),
        upper=model.upper.copy(),
        objective=model.objective.copy(),
        offset=model.objective_offset,
        names=list(model.names),
    )
