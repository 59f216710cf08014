"""In-process LP/MIP solves through scipy's HiGHS bindings."""

from __future__ import annotations

import time

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .model import MipModel, relax
from .result import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, SolveResult, SolverError

_LINPROG_STATUS = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}
_MILP_STATUS = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}


def _split(model: MipModel):
    A = model.A.tocsr()
    le = model.sense == "L"
    ge = model.sense == "G"
    eq = model.sense == "E"
    A_ub = A[np.flatnonzero(le | ge)]
    b_ub = model.rhs[le | ge].copy()
    flip = np.where(ge[le | ge], -1.0, 1.0)
    A_ub = A_ub.multiply(flip[:, None]).tocsr()
    b_ub *= flip
    return A_ub, b_ub, A[np.flatnonzero(eq)], model.rhs[eq]


def solve_highs(model: MipModel, time_limit: float | None = None) -> SolveResult:
    """LP through dual simplex (a vertex), MIP through HiGHS branch-and-cut at zero gap."""
    start = time.perf_counter()
    n = model.n_vars
    if not model.is_mip:
        A_ub, b_ub, A_eq, b_eq = _split(model)
        opts = {"presolve": True}
        if time_limit:
            opts["time_limit"] = time_limit
        res = linprog(
            model.c,
            A_ub=A_ub if A_ub.shape[0] else None,
            b_ub=b_ub if A_ub.shape[0] else None,
            A_eq=A_eq if A_eq.shape[0] else None,
            b_eq=b_eq if A_eq.shape[0] else None,
            bounds=np.column_stack([model.lb, model.ub]) if n else None,
            method="highs-ds",
            options=opts,
        )
        status = _LINPROG_STATUS.get(res.status)
        iters = int(getattr(res, "nit", 0) or 0)
    else:
        lo = np.where(model.sense == "L", -np.inf, model.rhs)
        hi = np.where(model.sense == "G", np.inf, model.rhs)
        cons = [LinearConstraint(model.A, lo, hi)] if model.n_rows else []
        opts = {"mip_rel_gap": 0.0}
        if time_limit:
            opts["time_limit"] = time_limit
        res = milp(model.c, constraints=cons, integrality=model.integer.astype(int),
                   bounds=Bounds(model.lb, model.ub), options=opts)
        status = _MILP_STATUS.get(res.status)
        if status is None and "unbounded or infeasible" in str(res.message):
            # HiGHS presolve may not tell the two apart; the relaxation does
            lp = solve_highs(relax(model), time_limit)
            status = INFEASIBLE if lp.status == INFEASIBLE else UNBOUNDED
        iters = int(getattr(res, "mip_node_count", 0) or 0)
    if status is None:
        raise SolverError(f"HiGHS failed: {res.message}")
    x = np.asarray(res.x, dtype=float) if res.x is not None else np.full(n, np.nan)
    obj = model.objective(x) if status == OPTIMAL else np.nan
    return SolveResult(status, obj, x, "highs", iters, (time.perf_counter() - start) * 1e3)
