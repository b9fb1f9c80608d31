"""Basis factorization: sparse LU of B plus a product-form eta file.

After every pivot the new basis is ``B E`` where ``E`` is the identity with
one column replaced by the entering column expressed in the old basis. Solves
apply the LU factors and then the eta matrices; the eta file is discarded and
B is refactored from scratch every ``REFACTOR_EVERY`` pivots.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

logger = logging.getLogger(__name__)


REFACTOR_EVERY = 64
SINGULAR_TOL = 1e-11


class LpNumericalError(Exception):
    """Raised when the basis matrix is numerically singular."""
    pass


class BasisFactor:
    """Factorized basis of a sparse constraint matrix."""

    def __init__(self, columns: sp.csc_matrix, basis: Sequence[int], step: int = 0):
        self.columns = columns
        self.size = columns.shape[0]
        self.etas: List[Tuple[int, np.ndarray]] = []
        self.lu = None
        self.refactor(basis, step)

    def refactor(self, basis: Sequence[int], step: int) -> None:
        """Factor ``B = columns[:, basis]`` and clear the eta file.

        Raises:
            LpNumericalError: If B is singular, naming the pivot step
        """
        self.etas = []
        if self.size == 0:
            self.lu = None
            return
        matrix = self.columns[:, list(basis)].tocsc()
        try:
            self.lu = splu(matrix)
        except RuntimeError as e:
            raise LpNumericalError(f"singular basis at pivot step {step}: {e}") from e
        diagonal = np.abs(self.lu.U.diagonal())
        scale = max(1.0, float(np.max(diagonal)) if diagonal.size else 1.0)
        if diagonal.size and float(np.min(diagonal)) < SINGULAR_TOL * scale:
            raise LpNumericalError(
                f"singular basis at pivot step {step}: smallest LU pivot {float(np.min(diagonal)):.3e}"
            )
        logger.debug(f"Refactored basis of size {self.size} at step {step}")

    @property
    def needs_refactor(self) -> bool:
        return len(self.etas) >= REFACTOR_EVERY

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``B^-1 rhs``."""
        if self.size == 0:
            return np.zeros(0)
        v = self.lu.solve(np.asarray(rhs, dtype=float))
        for row, alpha in self.etas:
            pivot = v[row] / alpha[row]
            v = v - alpha * pivot
            v[row] = pivot
        return v

    def solve_transpose(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``B^-T rhs``."""
        if self.size == 0:
            return np.zeros(0)
        v = np.array(rhs, dtype=float)
        for row, alpha in reversed(self.etas):
            others = float(alpha @ v) - alpha[row] * v[row]
            v[row] = (v[row] - others) / alpha[row]
        return self.lu.solve(v, trans="T")

    def update(self, row: int, alpha: np.ndarray) -> None:
        """Record the replacement of basis position ``row``; ``alpha = B^-1 a_q``."""
        self.etas.append((row, np.array(alpha, dtype=float)))
