from __future__ import annotations

from ..instance import Instance, derive_time_windows
from ..mip.model import ModelBuilder
from .varmap import DELTA, DELTA_Q, DELTA_T, DYNAMIC, POLICIES, SEMI_DYNAMIC, TWO_STAGE, W, VarKey, VarMap


def jump_time_coef(t: int, hi: int) -> float:
    """Coefficient of w_t in sum_{s<=hi} s*(w_s - w_{s-1}) (the jump period)."""
    return float(hi) if t == hi else -1.0


class Builder:
    """Shared state for one model build: columns, rows and the variable map."""

    def __init__(self, instance: Instance, family: str, policy: str):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        self.inst = instance
        self.policy = policy
        self.two_stage = policy == TWO_STAGE
        self.Q = instance.n_scenarios
        self.prob = instance.scenarios.probabilities
        self.windows = derive_time_windows(instance)
        self.mb = ModelBuilder(f"{family}_{policy}")
        self.vm = VarMap(family, policy, self.Q, windows=self.windows)

    def var(self, key: VarKey, name: str, integer: bool = True, ub: float = 1.0) -> int:
        col = self.mb.add_var(name, 0.0, ub, integer)
        self.vm.add(key)
        return col

    def row(self, name, terms, sense, rhs=0.0) -> None:
        self.mb.add_row(name, [c for c, _ in terms], [v for _, v in terms], sense, rhs)

    def obj(self, col: int, coef: float) -> None:
        self.mb.add_obj(col, coef)

    # -- pieces shared by both families --------------------------------

    def departure_vars(self, i, j, airport, win, scenarios):
        """w at the departure airport; ``scenarios`` is [None] when shared."""
        out = {}
        for q in scenarios:
            out[q] = {
                t: self.var(VarKey(W, i, j, airport, t, q),
                            f"w({i},{j},{airport},{t}{'' if q is None else f',{q}'})")
                for t in win
            }
        return out

    def monotone(self, tag, cols: dict[int, int], win) -> None:
        for t in range(win.lo + 1, win.hi + 1):
            self.row(f"{tag},{t})", [(cols[t], 1.0), (cols[t - 1], -1.0)], "G")

    def multistage_selection(self, i, j, win, wdep: dict) -> tuple[dict, dict]:
        """delta_qtij = w_t - w_{t-1} and delta~_qij = sum_t delta_qtij."""
        dt, dq = {}, {}
        for q in range(self.Q):
            dt[q] = {}
            for t in win:
                c = self.var(VarKey(DELTA_T, i, j, None, t, q), f"dt({q},{t},{i},{j})")
                dt[q][t] = c
                terms = [(c, 1.0), (wdep[q][t], -1.0)]
                if t > win.lo:
                    terms.append((wdep[q][t - 1], 1.0))
                self.row(f"dtdef({q},{t},{i},{j})", terms, "E")
            c = self.var(VarKey(DELTA_Q, i, j, None, None, q), f"dq({q},{i},{j})")
            dq[q] = c
            self.row(f"dqdef({q},{i},{j})", [(c, 1.0)] + [(dt[q][t], -1.0) for t in win], "E")
        return dt, dq

    def two_stage_selection(self, i, j, win, wdep: dict) -> int:
        c = self.var(VarKey(DELTA, i, j), f"d({i},{j})")
        self.row(f"depbnd({i},{j})", [(wdep[None][win.hi], 1.0), (c, -1.0)], "E")
        return c

    def nonanticipativity(self, i, j, flight, win, dt: dict) -> None:
        tree = self.inst.scenarios
        for bidx, b in enumerate(tree.branches):
            S = b.scenarios
            if len(S) < 2:
                continue
            if self.policy == DYNAMIC:
                periods = [t for t in win if b.start <= t <= b.end]
            elif self.policy == SEMI_DYNAMIC:
                periods = list(win) if b.start <= flight.dep <= b.end else []
            else:
                periods = []
            for t in periods:
                for qa, qb in zip(S, S[1:]):
                    self.row(f"na({i},{j},{t},{qa},{qb})",
                             [(dt[qa][t], 1.0), (dt[qb][t], -1.0)], "E")

    def route_sum(self, i, cols: list[int], q=None) -> None:
        suffix = "" if q is None else f",{q}"
        self.row(f"one({i}{suffix})", [(c, 1.0) for c in cols], "E", 1.0)

    def finish(self):
        return self.mb.build(), self.vm


__all__ = ["Builder", "jump_time_coef", "DELTA", "DELTA_Q", "DELTA_T", "W"]
