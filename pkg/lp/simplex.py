"""Bounded-variable primal revised simplex.

Every row gets a slack so that ``A x + s = b``: ``s >= 0`` for ``<=`` rows,
``s <= 0`` for ``>=`` rows and ``s = 0`` for equalities. Rows whose slack
cannot absorb the starting point get an artificial column, and phase 1
drives the artificials to zero before phase 2 optimizes the real objective.

Pricing is Dantzig's largest reduced cost. After ``STALL_THRESHOLD``
consecutive degenerate pivots the engine switches to Bland's smallest-index
rule for both the entering and the leaving variable, and switches back on
the first pivot that strictly improves the objective. Nonbasic variables may
jump to their opposite bound without a basis change.
"""
import logging
import time
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from formulation.model import Relation
from .basis import BasisFactor, LpNumericalError
from .problem import DEFAULT_ITER_LIMIT, DEFAULT_TOLERANCES, LpProblem, LpSolution, LpStatus, LpTolerances

logger = logging.getLogger(__name__)


STALL_THRESHOLD = 50
DEGENERATE_STEP = 1e-12

_BASIC = -1
_AT_LOWER = 0
_AT_UPPER = 1


class _PhaseResult:
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    LIMIT = "limit"
    TIME = "time"


class BoundedPrimalSimplex:
    """One solve of an LpProblem. Not reusable across problems."""

    def __init__(self, problem: LpProblem, tol: LpTolerances = DEFAULT_TOLERANCES,
                 iter_limit: int = DEFAULT_ITER_LIMIT, deadline: Optional[float] = None):
        self.problem = problem
        self.tol = tol
        self.iter_limit = iter_limit
        self.deadline = deadline
        self.iterations = 0
        self.bland = False
        self.degenerate_run = 0
        self._setup()

    def _setup(self) -> None:
        prob = self.problem
        m, n = prob.num_rows, prob.num_cols
        self.m, self.n = m, n

        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        for i, relation in enumerate(prob.relations):
            if relation == Relation.LE:
                slack_hi[i] = np.inf
            elif relation == Relation.GE:
                slack_lo[i] = -np.inf

        x_start = prob.lower.copy()
        residual = prob.rhs - prob.matrix @ x_start

        artificial_rows = [
            i for i in range(m) if residual[i] < slack_lo[i] or residual[i] > slack_hi[i]
        ]
        self.num_artificial = len(artificial_rows)
        signs = np.array([1.0 if residual[i] > 0 else -1.0 for i in artificial_rows])
        artificial = sp.csc_matrix(
            (signs, (artificial_rows, range(self.num_artificial))), shape=(m, self.num_artificial)
        )
        self.columns = sp.hstack([prob.matrix.tocsc(), sp.identity(m, format="csc"), artificial]).tocsc()
        self.rows_view = self.columns.T.tocsr()
        total = n + m + self.num_artificial
        self.first_artificial = n + m

        self.lo = np.concatenate([prob.lower, slack_lo, np.zeros(self.num_artificial)])
        self.hi = np.concatenate([prob.upper, slack_hi, np.full(self.num_artificial, np.inf)])
        self.x = np.zeros(total)
        self.x[:n] = x_start
        self.status = np.full(total, _AT_LOWER, dtype=int)
        self.basis = np.zeros(m, dtype=int)

        artificial_of_row = {row: n + m + a for a, row in enumerate(artificial_rows)}
        for i in range(m):
            slack = n + i
            if i in artificial_of_row:
                # slack parks at its finite bound nearest the residual (always 0)
                self.x[slack] = 0.0
                self.status[slack] = _AT_LOWER if np.isfinite(slack_lo[i]) else _AT_UPPER
                col = artificial_of_row[i]
                self.x[col] = abs(residual[i])
                self.status[col] = _BASIC
                self.basis[i] = col
            else:
                self.x[slack] = residual[i]
                self.status[slack] = _BASIC
                self.basis[i] = slack

        self.factor = BasisFactor(self.columns, self.basis, step=0)

    def _column(self, j: int) -> np.ndarray:
        dense = np.zeros(self.m)
        start, end = self.columns.indptr[j], self.columns.indptr[j + 1]
        dense[self.columns.indices[start:end]] = self.columns.data[start:end]
        return dense

    def _recompute_basics(self) -> None:
        nonbasic = self.status != _BASIC
        rhs = self.problem.rhs - self.columns[:, np.flatnonzero(nonbasic)] @ self.x[nonbasic]
        self.x[self.basis] = self.factor.solve(rhs)

    def _refactor(self) -> None:
        self.factor.refactor(self.basis, self.iterations)
        self._recompute_basics()

    def _price(self, cost: np.ndarray) -> Tuple[Optional[int], np.ndarray]:
        y = self.factor.solve_transpose(cost[self.basis])
        d = cost - self.rows_view @ y
        opt = self.tol.opt_tol
        movable = (self.status != _BASIC) & (self.hi > self.lo)
        eligible = movable & (
            ((self.status == _AT_LOWER) & (d < -opt)) | ((self.status == _AT_UPPER) & (d > opt))
        )
        candidates = np.flatnonzero(eligible)
        if candidates.size == 0:
            return None, y
        if self.bland:
            return int(candidates[0]), y
        return int(candidates[np.argmax(np.abs(d[candidates]))]), y

    def _ratio_test(self, entering: int, direction: float, alpha: np.ndarray) -> Tuple[float, Optional[int], int]:
        """Largest step and the blocking basis position (None for a bound flip)."""
        delta = -direction * alpha
        pivot_tol = self.tol.pivot_tol
        basic_lo = self.lo[self.basis]
        basic_hi = self.hi[self.basis]
        basic_x = self.x[self.basis]

        steps = np.full(self.m, np.inf)
        to_bound = np.zeros(self.m, dtype=int)
        falling = delta < -pivot_tol
        rising = delta > pivot_tol
        with np.errstate(invalid="ignore", divide="ignore"):
            down = (basic_x - basic_lo) / -delta
            up = (basic_hi - basic_x) / delta
        down_ok = falling & np.isfinite(basic_lo)
        up_ok = rising & np.isfinite(basic_hi)
        steps[down_ok] = np.maximum(down[down_ok], 0.0)
        to_bound[down_ok] = _AT_LOWER
        steps[up_ok] = np.maximum(up[up_ok], 0.0)
        to_bound[up_ok] = _AT_UPPER

        flip = self.hi[entering] - self.lo[entering]
        best = float(np.min(steps)) if self.m else np.inf
        if flip <= best:
            return flip, None, _AT_LOWER

        ties = np.flatnonzero(steps <= best + 1e-12 * max(1.0, best))
        if self.bland:
            row = int(ties[np.argmin(self.basis[ties])])
        else:
            magnitude = np.abs(delta[ties])
            top = ties[magnitude >= magnitude.max() - 1e-15]
            row = int(top[np.argmin(self.basis[top])])
        return best, row, int(to_bound[row])

    def _phase(self, cost: np.ndarray) -> str:
        while True:
            if self.iterations >= self.iter_limit:
                return _PhaseResult.LIMIT
            if self.deadline is not None and time.perf_counter() >= self.deadline:
                return _PhaseResult.TIME
            entering, _ = self._price(cost)
            if entering is None:
                return _PhaseResult.OPTIMAL

            direction = 1.0 if self.status[entering] == _AT_LOWER else -1.0
            alpha = self.factor.solve(self._column(entering))
            step, row, leaving_bound = self._ratio_test(entering, direction, alpha)
            if not np.isfinite(step):
                return _PhaseResult.UNBOUNDED

            self.iterations += 1
            if step > DEGENERATE_STEP:
                self.degenerate_run = 0
                if self.bland:
                    logger.debug(f"Leaving Bland's rule at step {self.iterations}")
                self.bland = False
            else:
                self.degenerate_run += 1
                if not self.bland and self.degenerate_run >= STALL_THRESHOLD:
                    logger.debug(f"Switching to Bland's rule after {self.degenerate_run} degenerate pivots")
                    self.bland = True

            self.x[self.basis] -= direction * step * alpha
            if row is None:
                self.status[entering] = _AT_UPPER if direction > 0 else _AT_LOWER
                self.x[entering] = self.hi[entering] if direction > 0 else self.lo[entering]
                continue

            leaving = int(self.basis[row])
            self.x[leaving] = self.lo[leaving] if leaving_bound == _AT_LOWER else self.hi[leaving]
            self.status[leaving] = leaving_bound
            self.x[entering] += direction * step
            self.status[entering] = _BASIC
            self.basis[row] = entering
            if abs(alpha[row]) < self.tol.pivot_tol:
                raise LpNumericalError(f"pivot {alpha[row]:.3e} below tolerance at pivot step {self.iterations}")
            self.factor.update(row, alpha)
            if self.factor.needs_refactor:
                self._refactor()

    def solve(self) -> LpSolution:
        prob = self.problem
        n, m = self.n, self.m

        if self.num_artificial:
            phase1_cost = np.zeros(len(self.x))
            phase1_cost[self.first_artificial:] = 1.0
            outcome = self._phase(phase1_cost)
            self._refactor()
            infeasibility = float(np.sum(self.x[self.first_artificial:]))
            threshold = self.tol.feas_tol * max(1.0, float(np.max(np.abs(prob.rhs))) if m else 1.0)
            if outcome == _PhaseResult.LIMIT:
                return self._result(LpStatus.ITERATION_LIMIT, "iteration limit in phase 1")
            if outcome == _PhaseResult.TIME:
                return self._result(LpStatus.TIME_LIMIT, "deadline reached in phase 1")
            if infeasibility > threshold:
                logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3e}")
                return self._result(LpStatus.INFEASIBLE, f"phase 1 infeasibility {infeasibility:.3e}")
            self.hi[self.first_artificial:] = 0.0
            self.x[self.first_artificial:][self.status[self.first_artificial:] != _BASIC] = 0.0
            self.bland = False
            self.degenerate_run = 0

        cost = np.zeros(len(self.x))
        cost[:n] = prob.objective
        outcome = self._phase(cost)
        self._refactor()
        if outcome == _PhaseResult.LIMIT:
            return self._result(LpStatus.ITERATION_LIMIT, "iteration limit in phase 2")
        if outcome == _PhaseResult.TIME:
            return self._result(LpStatus.TIME_LIMIT, "deadline reached in phase 2")
        if outcome == _PhaseResult.UNBOUNDED:
            return self._result(LpStatus.UNBOUNDED, "objective unbounded below")
        return self._result(LpStatus.OPTIMAL, cost=cost)

    def _result(self, status: LpStatus, message: Optional[str] = None,
                cost: Optional[np.ndarray] = None) -> LpSolution:
        prob = self.problem
        x = np.clip(self.x[:self.n], prob.lower, prob.upper)
        objective = float(prob.objective @ x) + prob.offset
        duals = np.zeros(self.m)
        dual_objective = None
        if cost is not None:
            duals = self.factor.solve_transpose(cost[self.basis])
            dual_objective = _lagrangian_bound(prob, duals, self.tol.opt_tol)
        logger.debug(f"LP {status.value} after {self.iterations} iterations, objective {objective:.6f}")
        return LpSolution(
            status=status,
            objective=objective if status in (LpStatus.OPTIMAL, LpStatus.ITERATION_LIMIT) else None,
            x=x,
            duals=duals,
            iterations=self.iterations,
            dual_objective=dual_objective,
            message=message,
        )


def _bound_terms(d: np.ndarray, lower: np.ndarray, upper: np.ndarray, tol: float) -> float:
    """Sum over variables of min over [lower, upper] of d * x, with
    reduced costs within ``tol`` of the wrong sign treated as zero."""
    total = 0.0
    for dj, lo, hi in zip(d, lower, upper):
        if dj > 0.0:
            total += dj * lo if np.isfinite(lo) else (0.0 if dj <= tol else -np.inf)
        elif dj < 0.0:
            total += dj * hi if np.isfinite(hi) else (0.0 if -dj <= tol else -np.inf)
    return total


def _lagrangian_bound(problem: LpProblem, y: np.ndarray, tol: float) -> float:
    """Dual objective b'y + min over the bound box of the Lagrangian."""
    d_struct = problem.objective - problem.matrix.T @ y
    slack_lo = np.array([0.0 if r != Relation.GE else -np.inf for r in problem.relations])
    slack_hi = np.array([0.0 if r != Relation.LE else np.inf for r in problem.relations])
    value = float(problem.rhs @ y)
    value += _bound_terms(d_struct, problem.lower, problem.upper, tol)
    value += _bound_terms(-y, slack_lo, slack_hi, tol)
    return value + problem.offset


def _solve_without_rows(problem: LpProblem) -> LpSolution:
    x = problem.lower.copy()
    for j, cj in enumerate(problem.objective):
        if cj < 0.0:
            if not np.isfinite(problem.upper[j]):
                return LpSolution(status=LpStatus.UNBOUNDED, x=x, message=f"column {j} unbounded below")
            x[j] = problem.upper[j]
    objective = float(problem.objective @ x) + problem.offset
    return LpSolution(status=LpStatus.OPTIMAL, objective=objective, x=x, duals=np.zeros(0),
                      dual_objective=objective)


def solve_lp(problem: LpProblem, tol: LpTolerances = DEFAULT_TOLERANCES,
             iter_limit: int = DEFAULT_ITER_LIMIT, deadline: Optional[float] = None) -> LpSolution:
    """Solve an LP with the bounded-variable primal simplex.

    Args:
        problem: The LP
        tol: Feasibility, optimality and pivot tolerances
        iter_limit: Pivot and bound-flip budget
        deadline: ``time.perf_counter()`` value after which the solve stops
            with TimeLimit

    Returns:
        LpSolution; on IterationLimit or TimeLimit ``x`` is the last iterate

    Raises:
        LpNumericalError: If a basis turns out singular
    """
    if problem.num_rows == 0:
        return _solve_without_rows(problem)
    return BoundedPrimalSimplex(problem, tol, iter_limit, deadline).solve()
