"""
Bounded-variable primal simplex.

Every row gets a slack so the system reads ``[A I] [x; s] = b`` with the row
sense moved into the slack bounds (``<=`` -> s >= 0, ``>=`` -> s <= 0, ``=`` ->
s = 0). Rows whose slack cannot absorb the starting residual receive a signed
artificial; phase 1 drives the artificials to zero, phase 2 minimizes the
model objective. Nonbasic variables rest at a finite bound, or at zero when
free. The dense tableau is rebuilt from the basis at a fixed pivot interval
and once more before optimality is declared.
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from mwen.core.config import SolverConfig
from mwen.model_ir import ModelArrays, ModelIR, Sense
from .base import SolveResult, SolveStatus

logger = logging.getLogger(__name__)

AT_LOWER, AT_UPPER, AT_ZERO, BASIC = 0, 1, 2, 3

PIVOT_TOL = 1e-9
OPTIMALITY_TOL = 1e-9
# relative to max(1, |b|); phase 1 objective above this means no feasible point
PHASE1_TOL = 1e-7
DEGENERATE_STEP = 1e-12


class BoundedSimplex:
    """One LP solve over a dense tableau"""

    def __init__(
        self,
        c: np.ndarray,
        A: np.ndarray,
        senses: Sequence[Sense],
        b: np.ndarray,
        lower: np.ndarray,
        upper: np.ndarray,
        config: SolverConfig,
    ):
        self.config = config
        m, n = A.shape
        self.m, self.n = m, n
        self.b = np.asarray(b, dtype=float)

        is_le = np.array([s == Sense.LE for s in senses], dtype=bool)
        is_ge = np.array([s == Sense.GE for s in senses], dtype=bool)
        slack_lo = np.where(is_ge, -math.inf, 0.0)
        slack_hi = np.where(is_le, math.inf, 0.0)

        start = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
        residual = self.b - A @ start if m else np.zeros(0)
        slack = np.clip(residual, slack_lo, slack_hi)
        gap = residual - slack
        art_rows = np.nonzero(gap != 0.0)[0]
        k = len(art_rows)
        signs = np.sign(gap[art_rows])

        self.num_structural = n
        self.first_artificial = n + m
        total = n + m + k
        M = np.zeros((m, total))
        M[:, :n] = A
        M[:, n:n + m] = np.eye(m)
        M[art_rows, n + m + np.arange(k)] = signs
        self.M = M

        self.lo = np.concatenate([lower, slack_lo, np.zeros(k)])
        self.hi = np.concatenate([upper, slack_hi, np.full(k, math.inf)])
        self.val = np.concatenate([start, slack, np.abs(gap[art_rows])])

        self.state = np.empty(total, dtype=np.int8)
        for j in range(n):
            if np.isfinite(lower[j]):
                self.state[j] = AT_LOWER
            elif np.isfinite(upper[j]):
                self.state[j] = AT_UPPER
            else:
                self.state[j] = AT_ZERO
        self.basis = n + np.arange(m)
        self.state[n:n + m] = BASIC
        for idx, row in enumerate(art_rows):
            slack_col = n + row
            self.state[slack_col] = AT_UPPER if gap[row] > 0 else AT_LOWER
            self.basis[row] = n + m + idx
        self.state[n + m:] = BASIC

        # B is diagonal with +-1 on artificial rows, so B^-1 M is a row scaling
        self.T = M.copy()
        if k:
            self.T[art_rows] *= signs[:, None]

        self.iterations = 0
        self._since_refactor = 0

    # core loop

    def solve(self, cost: np.ndarray) -> SolveResult:
        cost = np.asarray(cost, dtype=float)
        limit = self.config.lp_iteration_limit
        has_artificials = self.M.shape[1] > self.first_artificial

        if has_artificials:
            phase1 = np.zeros(self.M.shape[1])
            phase1[self.first_artificial:] = 1.0
            status = self._iterate(phase1, limit)
            if status == SolveStatus.ITERATION_LIMIT:
                return self._result(status, cost)
            infeasibility = float(np.sum(self.val[self.first_artificial:]))
            scale = max(1.0, float(np.max(np.abs(self.b))) if self.m else 1.0)
            if infeasibility > PHASE1_TOL * scale:
                logger.debug(f"Phase 1 ended with infeasibility {infeasibility:.3e}")
                return SolveResult(SolveStatus.INFEASIBLE, iterations=self.iterations)
            self._drive_out_artificials()

        phase2 = np.zeros(self.M.shape[1])
        phase2[:self.n] = cost
        status = self._iterate(phase2, limit)
        return self._result(status, cost)

    def _iterate(self, cost: np.ndarray, limit: int) -> SolveStatus:
        d = self._reduced_costs(cost)
        stall = 0
        while True:
            if self.iterations >= limit:
                logger.warning(f"LP iteration limit {limit} reached")
                return SolveStatus.ITERATION_LIMIT
            bland = stall >= self.config.bland_stall_threshold
            q, direction = self._choose_entering(d, bland)
            if q < 0:
                if self._since_refactor == 0:
                    return SolveStatus.OPTIMAL
                self._refactor()
                d = self._reduced_costs(cost)
                continue

            alpha = direction * self.T[:, q]
            theta, r, leave_to = self._ratio_test(q, alpha, bland)
            if math.isinf(theta):
                return SolveStatus.UNBOUNDED

            basic = self.basis.copy()
            if self.m:
                self.val[basic] = self.val[basic] - theta * alpha
            self.val[q] += direction * theta
            if r < 0:
                self.state[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.val[q] = self.hi[q] if direction > 0 else self.lo[q]
            else:
                leaving = basic[r]
                self.val[leaving] = self.lo[leaving] if leave_to == AT_LOWER else self.hi[leaving]
                self.state[leaving] = leave_to
                self.state[q] = BASIC
                self.basis[r] = q
                self._pivot(r, q)
                d = d - d[q] * self.T[r]
                d[q] = 0.0

            self.iterations += 1
            self._since_refactor += 1
            stall = stall + 1 if theta <= DEGENERATE_STEP else 0
            if self._since_refactor >= self.config.refactor_interval:
                self._refactor()
                d = self._reduced_costs(cost)

    def _choose_entering(self, d: np.ndarray, bland: bool) -> Tuple[int, int]:
        movable = self.hi > self.lo
        at_lower = (self.state == AT_LOWER) & movable & (d < -OPTIMALITY_TOL)
        at_upper = (self.state == AT_UPPER) & movable & (d > OPTIMALITY_TOL)
        free = (self.state == AT_ZERO) & (np.abs(d) > OPTIMALITY_TOL)
        eligible = at_lower | at_upper | free
        if not eligible.any():
            return -1, 0
        if bland:
            q = int(np.argmax(eligible))
        else:
            q = int(np.argmax(np.where(eligible, np.abs(d), -1.0)))
        if self.state[q] == AT_LOWER or (self.state[q] == AT_ZERO and d[q] < 0):
            return q, 1
        return q, -1

    def _ratio_test(self, q: int, alpha: np.ndarray, bland: bool) -> Tuple[float, int, int]:
        flip = self.hi[q] - self.lo[q]
        if self.m == 0:
            return flip, -1, -1

        basic = self.basis
        vals = self.val[basic]
        lo_b, hi_b = self.lo[basic], self.hi[basic]
        ratios = np.full(self.m, math.inf)
        falling = (alpha > PIVOT_TOL) & np.isfinite(lo_b)
        rising = (alpha < -PIVOT_TOL) & np.isfinite(hi_b)
        ratios[falling] = (vals[falling] - lo_b[falling]) / alpha[falling]
        ratios[rising] = (hi_b[rising] - vals[rising]) / (-alpha[rising])
        np.maximum(ratios, 0.0, out=ratios)

        theta = float(np.min(ratios))
        if flip <= theta:
            return float(flip), -1, -1
        if math.isinf(theta):
            return math.inf, -1, -1
        ties = np.nonzero(ratios <= theta + DEGENERATE_STEP)[0]
        if bland:
            r = int(ties[np.argmin(basic[ties])])
        else:
            r = int(ties[np.argmax(np.abs(alpha[ties]))])
        return theta, r, AT_LOWER if alpha[r] > 0 else AT_UPPER

    def _pivot(self, r: int, q: int) -> None:
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        rows = np.nonzero(col)[0]
        if len(rows):
            T[rows] -= np.outer(col[rows], T[r])
        T[:, q] = 0.0
        T[r, q] = 1.0

    def _refactor(self) -> None:
        self._since_refactor = 0
        if self.m == 0:
            return
        B = self.M[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.M)
            nonbasic = self.state != BASIC
            rhs = self.b - self.M[:, nonbasic] @ self.val[nonbasic]
            self.val[self.basis] = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError:
            logger.debug("Basis matrix singular during refactor; keeping updated tableau")

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        if self.m == 0:
            return cost.copy()
        d = cost - cost[self.basis] @ self.T
        d[self.basis] = 0.0
        return d

    def _drive_out_artificials(self) -> None:
        first = self.first_artificial
        for r in range(self.m):
            if self.basis[r] < first:
                continue
            row = np.abs(self.T[r, :first])
            row[self.state[:first] == BASIC] = 0.0
            q = int(np.argmax(row)) if first else 0
            if first and row[q] > 1e-7:
                leaving = self.basis[r]
                self.val[leaving] = 0.0
                self.state[leaving] = AT_LOWER
                self.state[q] = BASIC
                self.basis[r] = q
                self._pivot(r, q)
            # otherwise the row is redundant; its artificial stays basic at zero
        self.hi[first:] = 0.0
        self.val[first:][self.state[first:] != BASIC] = 0.0
        self._refactor()

    # results

    def _result(self, status: SolveStatus, cost: np.ndarray) -> SolveResult:
        if status not in (SolveStatus.OPTIMAL, SolveStatus.ITERATION_LIMIT):
            return SolveResult(status, iterations=self.iterations)
        x = self.val[:self.n].copy()
        objective = float(cost @ x)
        if status != SolveStatus.OPTIMAL:
            return SolveResult(status, x=x.tolist(), objective=objective, iterations=self.iterations)

        full_cost = np.zeros(self.M.shape[1])
        full_cost[:self.n] = cost
        if self.m:
            B = self.M[:, self.basis]
            y = np.linalg.solve(B.T, full_cost[self.basis])
            d = full_cost - self.M.T @ y
        else:
            y = np.zeros(0)
            d = full_cost.copy()
        d[self.basis] = 0.0
        dual_objective = float(self.b @ y + d @ self.val)
        return SolveResult(
            status,
            x=x.tolist(),
            objective=objective,
            best_bound=objective,
            duals=y.tolist(),
            reduced_costs=d[:self.n].tolist(),
            dual_objective=dual_objective,
            iterations=self.iterations,
        )


def solve_lp(
    model: Optional[ModelIR],
    config: Optional[SolverConfig] = None,
    lower: Optional[np.ndarray] = None,
    upper: Optional[np.ndarray] = None,
    arrays: Optional[ModelArrays] = None,
) -> SolveResult:
    """
    Solve the LP relaxation of a model (binaries relaxed to [0, 1])

    Args:
        model: Model to solve; may be None when ``arrays`` is given
        config: Tolerances and limits
        lower, upper: Bound overrides, used by branch and bound
        arrays: Precomputed dense arrays of the model

    Returns:
        SolveResult; Infeasible/Unbounded are statuses, not exceptions
    """
    config = config or SolverConfig()
    arrays = arrays if arrays is not None else model.to_arrays()
    lo = arrays.lower if lower is None else np.asarray(lower, dtype=float)
    hi = arrays.upper if upper is None else np.asarray(upper, dtype=float)
    if np.any(lo > hi):
        return SolveResult(SolveStatus.INFEASIBLE, message="crossed variable bounds")

    simplex = BoundedSimplex(arrays.c, arrays.A, arrays.senses, arrays.rhs, lo, hi, config)
    result = simplex.solve(arrays.c)
    if result.objective is not None:
        result.objective += arrays.objective_constant
        if result.best_bound is not None:
            result.best_bound += arrays.objective_constant
        if result.dual_objective is not None:
            result.dual_objective += arrays.objective_constant
    return result
