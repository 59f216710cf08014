"""Flight-by-flight (Lagrangian) stochastic models.

Binary ``w`` variables record whether a flight on a given route has
departed from / been admitted to each resource by period ``t``.  The
two-stage model shares the departure-airport variables across scenarios;
the semi-dynamic and dynamic models copy them per scenario and tie the
copies together with nonanticipativity rows on the departure indicators.
"""

from __future__ import annotations

from ..instance import PCA, Instance
from ..mip.model import MipModel
from ._common import Builder, jump_time_coef
from .varmap import LAGRANGIAN, W, VarKey, VarMap


def build_lagrangian(instance: Instance, policy: str) -> tuple[MipModel, VarMap]:
    bld = Builder(instance, LAGRANGIAN, policy)
    inst, Q, prob = instance, bld.Q, bld.prob
    cg, ca = inst.costs.cg, inst.costs.ca
    kinds = inst.network.kinds
    travel = inst.network.travel
    two = bld.two_stage
    cap_terms: dict[tuple[str, int, int], list[tuple[int, float]]] = {}

    for i, flight in enumerate(inst.flights):
        selectors: list = []
        for j, route in enumerate(flight.options):
            omega = route.omega
            wins = [bld.windows[(i, j, r)] for r in omega]
            dep_win = wins[0]
            wdep = bld.departure_vars(i, j, omega[0], dep_win, [None] if two else range(Q))
            # admission variables at each downstream resource, per scenario
            wres: list[dict] = [wdep]
            for pos in range(1, len(omega)):
                r = omega[pos]
                wres.append({
                    q: {t: bld.var(VarKey(W, i, j, r, t, q), f"w({i},{j},{r},{t},{q})")
                        for t in wins[pos]}
                    for q in range(Q)
                })

            # connectivity in time
            for pos, r in enumerate(omega):
                for q, cols in wres[pos].items():
                    qs = "" if q is None else f",{q}"
                    bld.monotone(f"mono({i},{j},{r}{qs}", cols, wins[pos])

            # connectivity between resources; beyond the upstream window the
            # upstream variable stays at its final value
            for pos in range(1, len(omega)):
                up, r = omega[pos - 1], omega[pos]
                d = travel[(up, r)]
                up_hi = wins[pos - 1].hi
                for q in range(Q):
                    up_cols = wres[pos - 1][None if (pos == 1 and two) else q]
                    for t in wins[pos]:
                        s = min(t - d, up_hi)
                        bld.row(f"conn({i},{j},{r},{t},{q})",
                                [(wres[pos][q][t], 1.0), (up_cols[s], -1.0)], "L")

            # capacity contributions: admissions w_t - w_{t-1}
            for pos in range(1, len(omega)):
                r = omega[pos]
                if kinds[r] != PCA:
                    continue
                win = wins[pos]
                for q in range(Q):
                    cols = wres[pos][q]
                    for t in win:
                        lst = cap_terms.setdefault((r, t, q), [])
                        lst.append((cols[t], 1.0))
                        if t > win.lo:
                            lst.append((cols[t - 1], -1.0))

            fin = wins[-1]
            if two:
                sel = bld.two_stage_selection(i, j, dep_win, wdep)
                selectors.append(sel)
                for q in range(Q):
                    bld.row(f"finbnd({i},{j},{q})", [(wres[-1][q][fin.hi], 1.0), (sel, -1.0)], "E")
                # objective: route cost, ground delay at (cg - ca), final delay at ca
                bld.obj(sel, route.cost - (cg - ca) * dep_win.lo - ca * fin.lo)
                for t, c in wdep[None].items():
                    bld.obj(c, (cg - ca) * jump_time_coef(t, dep_win.hi))
                for q in range(Q):
                    for t, c in wres[-1][q].items():
                        bld.obj(c, prob[q] * ca * jump_time_coef(t, fin.hi))
            else:
                dt, dq = bld.multistage_selection(i, j, dep_win, wdep)
                selectors.append(dq)
                for q in range(Q):
                    bld.row(f"finbnd({i},{j},{q})", [(wres[-1][q][fin.hi], 1.0), (dq[q], -1.0)], "E")
                bld.nonanticipativity(i, j, flight, dep_win, dt)
                for q in range(Q):
                    bld.obj(dq[q], prob[q] * (route.cost - (cg - ca) * dep_win.lo - ca * fin.lo))
                    for t, c in wdep[q].items():
                        bld.obj(c, prob[q] * (cg - ca) * jump_time_coef(t, dep_win.hi))
                    for t, c in wres[-1][q].items():
                        bld.obj(c, prob[q] * ca * jump_time_coef(t, fin.hi))

        if two:
            bld.route_sum(i, selectors)
        else:
            for q in range(Q):
                bld.route_sum(i, [dq[q] for dq in selectors], q)

    tree = inst.scenarios
    for (r, t, q) in sorted(cap_terms, key=lambda k: (k[0], k[2], k[1])):
        bld.row(f"cap({r},{t},{q})", cap_terms[(r, t, q)], "L", tree.capacity(r, t, q))
    return bld.finish()
