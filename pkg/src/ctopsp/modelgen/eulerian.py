"""Lagrangian-Eulerian models: flight-level departure stage, aggregate path flows.

Once a flight reaches the first PCA of its route it joins the traffic flow
of its path (the PCA sequence).  Per path and PCA the model counts flights
admitted (L) and flights holding in the air before admission (A); the
direct demand P at the path's first PCA comes from the arrival copies w~
of the airport departure variables.

Time conventions: ``A[t]`` is the holding stock at the end of period t, so
a flight arriving at t and admitted at t' contributes t' - t periods to the
sum of A, which is exactly its air holding.
"""

from __future__ import annotations

from ..instance import PCA, Instance, derive_paths
from ..mip.model import MipModel
from ._common import Builder, jump_time_coef
from .varmap import EULERIAN, A, L, P, W_ARR, VarKey, VarMap

GROUND_CG = "cg"
GROUND_CG_MINUS_CA = "cg-ca"


def _path_ranges(inst: Instance, bld: Builder, paths, path_of):
    """First admissible period at every PCA of every path."""
    travel = inst.network.travel
    first = {}
    for (i, j), p in path_of.items():
        route = inst.flights[i].options[j]
        lo = bld.windows[(i, j, route.omega[0])].lo + travel[(route.omega[0], route.omega[1])]
        first[p] = min(first.get(p, lo), lo)
    ranges = []
    for p, path in enumerate(paths):
        t0 = first[p]
        starts = [t0]
        for a, b in zip(path.pcas, path.pcas[1:]):
            starts.append(starts[-1] + travel[(a, b)])
        ranges.append(starts)
    return ranges


def build_lagrangian_eulerian(instance: Instance, policy: str, ground: str = GROUND_CG) -> tuple[MipModel, VarMap]:
    if ground not in (GROUND_CG, GROUND_CG_MINUS_CA):
        raise ValueError(f"unknown ground coefficient mode {ground!r}")
    bld = Builder(instance, EULERIAN, policy)
    inst, Q, prob = instance, bld.Q, bld.prob
    cg, ca = inst.costs.cg, inst.costs.ca
    g = cg if ground == GROUND_CG else cg - ca
    H = inst.horizon
    travel = inst.network.travel
    kinds = inst.network.kinds
    two = bld.two_stage
    paths, path_of = derive_paths(inst)
    bld.vm.paths, bld.vm.path_of = paths, path_of
    pq = [None] if two else list(range(Q))   # scenario copies of flight-level and P variables

    # direct demand terms: (path, t, q) -> [(col, coef)]
    demand: dict[tuple[int, int, int | None], list[tuple[int, float]]] = {}

    for i, flight in enumerate(inst.flights):
        selectors = []
        for j, route in enumerate(flight.options):
            ap, r1 = route.omega[0], route.omega[1]
            d0 = travel[(ap, r1)]
            win = bld.windows[(i, j, ap)]
            wdep = bld.departure_vars(i, j, ap, win, pq)
            p = path_of[(i, j)]
            for q in pq:
                qs = "" if q is None else f",{q}"
                bld.monotone(f"mono({i},{j},{ap}{qs}", wdep[q], win)
                # arrival copy at the first PCA; its monotonicity and boundary
                # values follow from the equality link
                prev = None
                for t in win:
                    c = bld.var(VarKey(W_ARR, i, j, r1, t + d0, q), f"wt({i},{j},{r1},{t + d0}{qs})")
                    bld.row(f"arr({i},{j},{t + d0}{qs})", [(c, 1.0), (wdep[q][t], -1.0)], "E")
                    terms = demand.setdefault((p, t + d0, q), [])
                    terms.append((c, 1.0))
                    if prev is not None:
                        terms.append((prev, -1.0))
                    prev = c

            if two:
                sel = bld.two_stage_selection(i, j, win, wdep)
                selectors.append(sel)
                bld.obj(sel, route.cost - g * win.lo)
                for t, c in wdep[None].items():
                    bld.obj(c, g * jump_time_coef(t, win.hi))
            else:
                dt, dq = bld.multistage_selection(i, j, win, wdep)
                selectors.append(dq)
                for q in range(Q):
                    for t in win:
                        bld.obj(dt[q][t], prob[q] * (cg * (t - win.lo) + route.cost))
                bld.nonanticipativity(i, j, flight, win, dt)

        if two:
            bld.route_sum(i, selectors)
        else:
            for q in range(Q):
                bld.route_sum(i, [dq[q] for dq in selectors], q)

    ranges = _path_ranges(inst, bld, paths, path_of)
    if any(s[-1] > H for s in ranges):
        raise ValueError("horizon too short for path flows")

    # P: direct demand at the first PCA of each path
    Pcol: dict[tuple[int, int, int | None], int] = {}
    for p, path in enumerate(paths):
        k = path.first
        for q in pq:
            qs = "" if q is None else f",{q}"
            for t in range(ranges[p][0], H + 1):
                c = bld.var(VarKey(P, None, None, k, t, q, p), f"P({k},{t},{p}{qs})", integer=False, ub=float("inf"))
                Pcol[(p, t, q)] = c
                bld.row(f"Pdef({k},{t},{p}{qs})", [(c, 1.0)] + [(col, -v) for col, v in demand.get((p, t, q), [])], "E")

    cap_terms: dict[tuple[str, int, int], list[tuple[int, float]]] = {}
    for p, path in enumerate(paths):
        for q in range(Q):
            src = None if two else q
            Lcols: list[dict[int, int]] = []
            for m, k in enumerate(path.pcas):
                lo = ranges[p][m]
                Lk, Ak = {}, {}
                for t in range(lo, H + 1):
                    Lk[t] = bld.var(VarKey(L, None, None, k, t, q, p), f"L({k},{t},{p},{q})",
                                    integer=False, ub=float("inf"))
                    Ak[t] = bld.var(VarKey(A, None, None, k, t, q, p), f"A({k},{t},{p},{q})",
                                    integer=False, ub=float("inf"))
                    bld.obj(Ak[t], ca * prob[q])
                for t in range(lo, H + 1):
                    # L_t + A_t - A_{t-1} - inflow_t = 0
                    terms = [(Lk[t], 1.0), (Ak[t], 1.0)]
                    if t > lo:
                        terms.append((Ak[t - 1], -1.0))
                    if m == 0:
                        terms.append((Pcol[(p, t, src)], -1.0))
                    else:
                        up = t - travel[(path.pcas[m - 1], k)]
                        if up in Lcols[-1]:
                            terms.append((Lcols[-1][up], -1.0))
                    bld.row(f"flow({k},{t},{p},{q})", terms, "E")
                    if kinds[k] == PCA:
                        cap_terms.setdefault((k, t, q), []).append((Lk[t], 1.0))
                Lcols.append(Lk)
            cons = [(Pcol[(p, t, src)], 1.0) for t in range(ranges[p][0], H + 1)]
            cons += [(c, -1.0) for c in Lcols[-1].values()]
            bld.row(f"cons({p},{q})", cons, "E")

    tree = inst.scenarios
    for (k, t, q) in sorted(cap_terms, key=lambda x: (x[0], x[2], x[1])):
        bld.row(f"cap({k},{t},{q})", cap_terms[(k, t, q)], "L", tree.capacity(k, t, q))
    return bld.finish()
