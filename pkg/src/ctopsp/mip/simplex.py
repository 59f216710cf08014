"""Reference LP solver: bounded-variable primal simplex with Bland's rule.

Meant for desk-scale checks (a few thousand nonzeros), not for speed.  The
basis inverse is kept dense and updated with eta transformations, with a
fresh inversion every ``refactor`` pivots.

Rows become equalities with one slack each: ``A x + s = b`` where the
slack is in ``[0, inf)`` for ``<=`` rows, ``(-inf, 0]`` for ``>=`` rows and
fixed at 0 for equalities.  Rows whose slack cannot absorb the starting
residual get an artificial column; phase 1 drives those to zero.
"""

from __future__ import annotations

import time

import numpy as np

from .model import MipModel
from .result import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, SolveResult

FEAS_TOL = 1e-7
OPT_TOL = 1e-9
PIVOT_TOL = 1e-9
SOFT_NNZ_LIMIT = 20_000


class _Bounded:
    def __init__(self, model: MipModel, feas_tol: float, opt_tol: float):
        self.feas_tol = feas_tol
        self.opt_tol = opt_tol
        m, n = model.n_rows, model.n_vars
        self.m, self.n = m, n
        self.A = model.A.tocsc()
        self.AT = model.A.tocsr().T.tocsr()
        self.b = model.rhs.astype(float)
        sense = model.sense
        s_lb = np.where(sense == "G", -np.inf, 0.0)
        s_ub = np.where(sense == "L", np.inf, 0.0)

        x = np.zeros(n)
        lb, ub = model.lb.astype(float), model.ub.astype(float)
        x = np.where(np.isfinite(lb), lb, np.where(np.isfinite(ub), ub, 0.0))
        resid = self.b - (self.A @ x if m else np.zeros(0))
        s = np.clip(resid, s_lb, s_ub)
        excess = resid - s
        art_rows = np.flatnonzero(np.abs(excess) > 0)
        self.art_rows = art_rows
        self.art_sign = np.sign(excess[art_rows])
        na = len(art_rows)
        self.na = na
        N = n + m + na
        self.lb = np.concatenate([lb, s_lb, np.zeros(na)])
        self.ub = np.concatenate([ub, s_ub, np.full(na, np.inf)])
        self.x = np.concatenate([x, s, np.abs(excess[art_rows])])

        basis = np.arange(n, n + m)
        basis[art_rows] = n + m + np.arange(na)
        self.basis = basis
        self.is_basic = np.zeros(N, dtype=bool)
        self.is_basic[basis] = True
        self.Binv = np.eye(m)
        if na:
            self.Binv[art_rows, art_rows] = self.art_sign
        self.row_of_art = {int(r): k for k, r in enumerate(art_rows)}
        self.iterations = 0

    def column(self, j: int) -> np.ndarray:
        m, n = self.m, self.n
        col = np.zeros(m)
        if j < n:
            lo, hi = self.A.indptr[j], self.A.indptr[j + 1]
            col[self.A.indices[lo:hi]] = self.A.data[lo:hi]
        elif j < n + m:
            col[j - n] = 1.0
        else:
            k = j - n - m
            col[self.art_rows[k]] = self.art_sign[k]
        return col

    def basis_matrix(self) -> np.ndarray:
        return np.column_stack([self.column(int(j)) for j in self.basis]) if self.m else np.zeros((0, 0))

    def refactor(self) -> None:
        if not self.m:
            return
        self.Binv = np.linalg.inv(self.basis_matrix())
        xs = self.x.copy()
        xs[self.basis] = 0.0
        r = self.b - self.A @ xs[: self.n] - xs[self.n:self.n + self.m]
        if self.na:
            np.add.at(r, self.art_rows, -self.art_sign * xs[self.n + self.m:])
        self.x[self.basis] = self.Binv @ r

    def reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = cost[self.basis] @ self.Binv if self.m else np.zeros(0)
        d = cost.copy()
        n, m = self.n, self.m
        if m:
            d[:n] -= self.AT @ y
            d[n:n + m] -= y
            if self.na:
                d[n + m:] -= self.art_sign * y[self.art_rows]
        return d

    def run(self, cost: np.ndarray, max_iter: int, refactor: int) -> str:
        """Iterate until optimal, unbounded or the iteration cap."""
        tol = self.opt_tol
        since = 0
        while True:
            d = self.reduced_costs(cost)
            lb, ub, x = self.lb, self.ub, self.x
            nonbasic = ~self.is_basic
            movable = nonbasic & (lb < ub)
            at_lb = movable & np.isfinite(lb) & (x <= lb)
            at_ub = movable & np.isfinite(ub) & (x >= ub) & ~at_lb
            free = movable & ~np.isfinite(lb) & ~np.isfinite(ub)
            up = (at_lb & (d < -tol)) | (free & (d < -tol))
            down = (at_ub & (d > tol)) | (free & (d > tol))
            cand = np.flatnonzero(up | down)
            if not len(cand):
                return OPTIMAL
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            q = int(cand[0])  # Bland: lowest index
            direction = 1.0 if up[q] else -1.0
            alpha = self.Binv @ self.column(q) if self.m else np.zeros(0)
            rate = -direction * alpha  # d x_B / d theta
            xb = x[self.basis]
            lbb, ubb = lb[self.basis], ub[self.basis]
            theta = np.full(self.m, np.inf)
            dec = rate < -PIVOT_TOL
            inc = rate > PIVOT_TOL
            with np.errstate(divide="ignore", invalid="ignore"):
                theta[dec] = np.where(np.isfinite(lbb[dec]), (xb[dec] - lbb[dec]) / -rate[dec], np.inf)
                theta[inc] = np.where(np.isfinite(ubb[inc]), (ubb[inc] - xb[inc]) / rate[inc], np.inf)
            theta = np.maximum(theta, 0.0)
            t_min = float(theta.min()) if self.m else np.inf
            flip = ub[q] - lb[q]
            self.iterations += 1
            if flip <= t_min and np.isfinite(flip):
                x[self.basis] = xb + flip * rate
                x[q] = ub[q] if direction > 0 else lb[q]
                continue
            if not np.isfinite(t_min):
                return UNBOUNDED
            # Bland tie-break on the leaving variable: smallest column index
            ties = np.flatnonzero(theta <= t_min + 1e-12)
            r = int(ties[np.argmin(self.basis[ties])])
            leaving = int(self.basis[r])
            x[self.basis] = xb + t_min * rate
            x[q] = x[q] + direction * t_min
            x[leaving] = lb[leaving] if rate[r] < 0 else ub[leaving]
            piv = alpha[r]
            row = self.Binv[r] / piv
            self.Binv -= np.outer(alpha, row)
            self.Binv[r] = row
            self.basis[r] = q
            self.is_basic[leaving] = False
            self.is_basic[q] = True
            since += 1
            if since >= refactor:
                self.refactor()
                since = 0


def solve_reference(
    model: MipModel,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_iter: int | None = None,
    refactor: int = 64,
) -> SolveResult:
    """Solve the continuous model ``model`` to an optimal basic solution."""
    if model.is_mip:
        raise ValueError("reference solver handles continuous models only; relax() first")
    start = time.perf_counter()
    if max_iter is None:
        max_iter = 10 * (model.n_rows + model.n_vars)
    lp = _Bounded(model, feas_tol, opt_tol)
    n, m, na = lp.n, lp.m, lp.na

    def finish(status: str) -> SolveResult:
        x = lp.x[:n].copy()
        obj = model.objective(x) if status == OPTIMAL else np.nan
        return SolveResult(status, obj, x, "reference", lp.iterations,
                           (time.perf_counter() - start) * 1e3)

    if na:
        phase1 = np.zeros(n + m + na)
        phase1[n + m:] = 1.0
        status = lp.run(phase1, max_iter, refactor)
        if status == ITERATION_LIMIT:
            return finish(status)
        lp.refactor()
        if lp.x[n + m:].sum() > feas_tol * max(1.0, na):
            return finish(INFEASIBLE)
        lp.ub[n + m:] = 0.0
        lp.x[n + m:] = np.where(lp.is_basic[n + m:], lp.x[n + m:], 0.0)
    cost = np.concatenate([model.c.astype(float), np.zeros(m + na)])
    status = lp.run(cost, max_iter, refactor)
    if status == OPTIMAL:
        lp.refactor()
        if np.max(np.abs(lp.x[n + m:]), initial=0.0) > feas_tol * 10:
            return finish(INFEASIBLE)
    return finish(status)
