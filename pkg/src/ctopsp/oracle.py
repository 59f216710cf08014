"""Brute-force ground truth for tiny instances.

A flight's *decision* is a (route, departure period) pair.  For a fixed
joint decision and scenario, the cheapest second stage (air holding before
each PCA) is found by an exact depth-first search over admission
periods.  A *policy* assigns one decision per scenario to each flight,
constrained by the policy class:

* two-stage: the same decision in every scenario;
* semi-dynamic: the same decision for scenarios that share the branch
  active at the scheduled departure;
* dynamic: two scenarios separated at period ``s`` either take the same
  decision or both depart at ``s`` or later.

The optimum is an exhaustive minimum over the product of per-flight
policies, ties broken by the lexicographically first policy encoding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .instance import PCA, Instance, derive_time_windows
from .modelgen.varmap import DYNAMIC, POLICIES, SEMI_DYNAMIC, TWO_STAGE

HARD_LIMIT = 10 ** 8          # candidate policy combinations
TABLE_LIMIT = 5 * 10 ** 6     # entries of the per-scenario cost table
SOFT_LIMITS = {"flights": 3, "options": 2, "pcas_per_route": 2, "periods": 10, "scenarios": 3}


class BudgetExceeded(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class FlightDecision:
    route: int
    departure: int
    admissions: tuple[int, ...]  # aligned with the route's resource sequence; [0] is the departure


@dataclass(frozen=True)
class Policy:
    policy_class: str
    # decisions[i][q]
    decisions: tuple[tuple[FlightDecision, ...], ...]


@dataclass(frozen=True)
class PolicyCost:
    feasible: bool
    scenario_costs: tuple[float, ...]
    expected: float
    violations: tuple[str, ...] = ()


@dataclass(frozen=True)
class OracleResult:
    cost: float
    policy: Policy | None
    scenario_costs: tuple[float, ...]
    n_candidates: int


# --- evaluation ----------------------------------------------------------

def _scenario_groups(instance: Instance, t: int) -> list[tuple[int, ...]]:
    tree = instance.scenarios
    groups = [b.scenarios for b in tree.branches if b.active(t)]
    if not groups:
        # departure outside the tree's periods: every scenario on its own
        groups = [(q,) for q in range(tree.n_scenarios)]
    return groups


def _consistent(instance: Instance, policy_class: str, flight, per_q) -> str | None:
    """Return a description of the first class violation, or None."""
    Q = instance.n_scenarios
    key = [(d.route, d.departure) for d in per_q]
    if policy_class == TWO_STAGE:
        if len(set(key)) > 1:
            return "two-stage decisions differ across scenarios"
    elif policy_class == SEMI_DYNAMIC:
        for grp in _scenario_groups(instance, flight.dep):
            if len({key[q] for q in grp}) > 1:
                return f"semi-dynamic decisions differ within branch {list(grp)}"
    elif policy_class == DYNAMIC:
        tree = instance.scenarios
        for q1 in range(Q):
            for q2 in range(q1 + 1, Q):
                s = tree.split_period(q1, q2)
                if key[q1] == key[q2]:
                    continue
                if s is None or key[q1][1] < s or key[q2][1] < s:
                    return f"dynamic decisions of scenarios {q1},{q2} differ before their split"
    else:
        raise PolicyError(f"unknown policy class {policy_class!r}")
    return None


def evaluate_policy(instance: Instance, policy: Policy) -> PolicyCost:
    """Per-scenario and expected cost of a fully specified policy.

    Raises PolicyError for structurally invalid policies; capacity overruns
    give ``feasible=False`` with infinite costs.
    """
    Q = instance.n_scenarios
    wins = derive_time_windows(instance)
    travel = instance.network.travel
    kinds = instance.network.kinds
    cg, ca = instance.costs.cg, instance.costs.ca
    if len(policy.decisions) != len(instance.flights):
        raise PolicyError("policy must give decisions for every flight")
    costs = [0.0] * Q
    use: dict[tuple[str, int, int], int] = {}
    for i, (flight, per_q) in enumerate(zip(instance.flights, policy.decisions)):
        if len(per_q) != Q:
            raise PolicyError(f"flight {flight.id}: expected {Q} scenario decisions")
        msg = _consistent(instance, policy.policy_class, flight, per_q)
        if msg:
            raise PolicyError(f"flight {flight.id}: {msg}")
        for q, d in enumerate(per_q):
            if not 0 <= d.route < len(flight.options):
                raise PolicyError(f"flight {flight.id}: unknown route {d.route}")
            route = flight.options[d.route]
            if len(d.admissions) != len(route.omega) or d.admissions[0] != d.departure:
                raise PolicyError(f"flight {flight.id}: admissions must follow the route, starting at departure")
            if d.departure < flight.dep:
                raise PolicyError(f"flight {flight.id}: departs before scheduled departure")
            for k, r in enumerate(route.omega):
                w = wins[(i, d.route, r)]
                if d.admissions[k] not in w:
                    raise PolicyError(f"flight {flight.id}: admission {d.admissions[k]} at {r} outside [{w.lo},{w.hi}]")
                if k:
                    if d.admissions[k] < d.admissions[k - 1] + travel[(route.omega[k - 1], r)]:
                        raise PolicyError(f"flight {flight.id}: admission at {r} violates travel time")
                    if kinds[r] == PCA:
                        use[(r, d.admissions[k], q)] = use.get((r, d.admissions[k], q), 0) + 1
            g = d.departure - flight.dep
            a = d.admissions[-1] - route.crossings[-1] - g
            costs[q] += route.cost + cg * g + ca * a
    over = tuple(
        f"{r} period {t} scenario {q}: {n} > {instance.scenarios.capacity(r, t, q)}"
        for (r, t, q), n in sorted(use.items()) if n > instance.scenarios.capacity(r, t, q)
    )
    if over:
        return PolicyCost(False, tuple([math.inf] * Q), math.inf, over)
    p = instance.scenarios.probabilities
    exp = 0.0
    for q in range(Q):
        exp = exp + p[q] * costs[q]
    return PolicyCost(True, tuple(costs), exp)


# --- enumeration ---------------------------------------------------------

class _Tables:
    """Decisions, second-stage candidates and capacities of one instance."""

    def __init__(self, instance: Instance):
        self.inst = instance
        wins = derive_time_windows(instance)
        kinds = instance.network.kinds
        self.pcas = instance.network.ids(PCA)
        pidx = {k: n for n, k in enumerate(self.pcas)}
        self.T = instance.horizon + 1
        self.decisions: list[list[tuple[int, int]]] = []
        # per (flight, decision): (cells array, holds array, hold vectors)
        self.cands: list[list[tuple[np.ndarray, np.ndarray, list]]] = []
        for i, f in enumerate(instance.flights):
            decs, cands = [], []
            for j, route in enumerate(f.options):
                aw = wins[(i, j, route.omega[0])]
                pos = [k for k, r in enumerate(route.omega) if k and kinds[r] == PCA]
                slack = [wins[(i, j, route.omega[k])].hi - route.crossings[k] for k in pos]
                for d in aw:
                    g = d - f.dep
                    vecs = []
                    # cumulative holding before each PCA, nondecreasing
                    for cum in itertools.product(*[range(s - g + 1) for s in slack]):
                        if all(a <= b for a, b in zip(cum, cum[1:])):
                            vecs.append(cum)
                    vecs.sort(key=lambda v: (v[-1] if v else 0, v))
                    cells = np.full((len(vecs), max(len(pos), 1)), -1, dtype=np.int64)
                    for n, v in enumerate(vecs):
                        for m, k in enumerate(pos):
                            cells[n, m] = pidx[route.omega[k]] * self.T + route.crossings[k] + g + v[m]
                    holds = np.array([v[-1] if v else 0 for v in vecs], dtype=np.int64)
                    decs.append((j, d))
                    cands.append((cells, holds, vecs))
            self.decisions.append(decs)
            self.cands.append(cands)
        tree = instance.scenarios
        self.capacity = []
        for q in range(tree.n_scenarios):
            cap = np.zeros(len(self.pcas) * self.T, dtype=np.int64)
            for n, k in enumerate(self.pcas):
                cap[n * self.T:(n + 1) * self.T] = tree.capacities[k][q][: self.T]
            self.capacity.append(cap)

    def stack(self, joint):
        parts = [self.cands[f][d] for f, d in enumerate(joint)]
        width = max(p[0].shape[1] for p in parts)
        cells = np.concatenate([
            np.pad(p[0], ((0, 0), (0, width - p[0].shape[1])), constant_values=-1) for p in parts
        ])
        holds = np.concatenate([p[1] for p in parts])
        offsets = np.zeros(len(parts) + 1, dtype=np.int64)
        offsets[1:] = np.cumsum([len(p[1]) for p in parts])
        return cells, holds, offsets

    def first_stage_cost(self, joint) -> float:
        inst = self.inst
        c = 0.0
        for f, d in enumerate(joint):
            j, dep = self.decisions[f][d]
            c += inst.flights[f].options[j].cost + inst.costs.cg * (dep - inst.flights[f].dep)
        return c


def _flight_policies(instance: Instance, policy_class: str, i: int, n_dec: int, decs, limit: int):
    Q = instance.n_scenarios
    flight = instance.flights[i]
    if policy_class == TWO_STAGE:
        return [(d,) * Q for d in range(n_dec)]
    if policy_class == SEMI_DYNAMIC:
        groups = _scenario_groups(instance, flight.dep)
        out = []
        for pick in itertools.product(range(n_dec), repeat=len(groups)):
            row = [0] * Q
            for grp, d in zip(groups, pick):
                for q in grp:
                    row[q] = d
            out.append(tuple(row))
        return sorted(out)
    if n_dec ** Q > limit:
        raise BudgetExceeded(f"flight {flight.id}: {n_dec}^{Q} dynamic decision tuples exceed the budget")
    tree = instance.scenarios
    split = {(a, b): tree.split_period(a, b) for a in range(Q) for b in range(a + 1, Q)}
    out = []

    def ok(a, b, da, db):
        if da == db:
            return True
        s = split[(a, b)]
        return s is not None and decs[da][1] >= s and decs[db][1] >= s

    def grow(prefix):
        q = len(prefix)
        if q == Q:
            out.append(tuple(prefix))
            return
        for d in range(n_dec):
            if all(ok(a, q, prefix[a], d) for a in range(q)):
                grow(prefix + [d])

    grow([])
    return out


def check_budget(instance: Instance, policy_class: str) -> int:
    """Number of candidate policy combinations; raises BudgetExceeded above the hard limit."""
    return _prepare(instance, policy_class)[2]


def _prepare(instance, policy_class):
    if policy_class not in POLICIES:
        raise ValueError(f"unknown policy class {policy_class!r}")
    Q = instance.n_scenarios
    # cheap size screen before building any tables
    g = instance.caps.ground + 1
    n_dec = [len(f.options) * g for f in instance.flights]
    n_joint = math.prod(n_dec)
    if n_joint * Q > TABLE_LIMIT:
        raise BudgetExceeded(
            f"{n_joint} joint decisions x {Q} scenarios exceed the oracle table limit {TABLE_LIMIT}"
        )
    tabs = _Tables(instance)
    pols = [_flight_policies(instance, policy_class, i, len(tabs.decisions[i]), tabs.decisions[i], HARD_LIMIT)
            for i in range(len(instance.flights))]
    count = math.prod(len(p) for p in pols)
    if count > HARD_LIMIT:
        raise BudgetExceeded(f"{count} candidate policies exceed the hard limit {HARD_LIMIT}")
    return tabs, pols, count


def cost_table(tabs: _Tables) -> np.ndarray:
    """(Q, n_joint) expected-free scenario costs; inf marks infeasible."""
    inst = tabs.inst
    Q = inst.n_scenarios
    sizes = [len(d) for d in tabs.decisions]
    n_joint = math.prod(sizes)
    out = np.full((Q, n_joint), np.inf)
    ca = inst.costs.ca
    for idx, joint in enumerate(itertools.product(*[range(s) for s in sizes])):
        cells, holds, offsets = tabs.stack(joint)
        base = tabs.first_stage_cost(joint)
        for q in range(Q):
            h = kernels.min_total_holding(cells, holds, offsets, tabs.capacity[q])
            if h >= 0:
                out[q, idx] = base + ca * h
    return out


def enumerate_policies(instance: Instance, policy_class: str) -> OracleResult:
    """Exhaustive optimum over all policies of ``policy_class``."""
    tabs, pols, count = _prepare(instance, policy_class)
    Q = instance.n_scenarios
    sizes = [len(d) for d in tabs.decisions]
    strides = np.ones(len(sizes), dtype=np.int64)
    for f in range(len(sizes) - 2, -1, -1):
        strides[f] = strides[f + 1] * sizes[f + 1]
    table = cost_table(tabs)
    flat = np.array([row for p in pols for row in p], dtype=np.int64).reshape(-1, Q)
    offsets = np.zeros(len(pols) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(p) for p in pols])
    prob = np.asarray(instance.scenarios.probabilities, dtype=np.float64)
    best, sel = kernels.joint_min(table, flat, offsets, strides, prob)
    if not sel:
        return OracleResult(math.inf, None, tuple([math.inf] * Q), count)
    chosen = [flat[k] for k in sel]
    decisions: list[list[FlightDecision]] = [[None] * Q for _ in instance.flights]  # type: ignore[list-item]
    scen = []
    for q in range(Q):
        joint = tuple(int(chosen[f][q]) for f in range(len(sizes)))
        cells, holds, offs = tabs.stack(joint)
        _, pick = kernels.min_total_holding(cells, holds, offs, tabs.capacity[q], True)
        idx = int(np.dot(joint, strides))
        scen.append(float(table[q, idx]))
        for f, d in enumerate(joint):
            j, dep = tabs.decisions[f][d]
            route = instance.flights[f].options[j]
            vec = tabs.cands[f][d][2][pick[f] - offs[f]]
            g = dep - instance.flights[f].dep
            adm, cum, m = [dep], 0, 0
            for k in range(1, len(route.omega)):
                if instance.network.kinds[route.omega[k]] == PCA:
                    cum = vec[m]
                    m += 1
                adm.append(route.crossings[k] + g + cum)
            decisions[f][q] = FlightDecision(j, dep, tuple(adm))
    policy = Policy(policy_class, tuple(tuple(d) for d in decisions))
    return OracleResult(float(best), policy, tuple(scen), count)


def within_soft_limits(instance: Instance) -> list[str]:
    """Documented soft limits that the instance exceeds (informational)."""
    out = []
    kinds = instance.network.kinds
    if len(instance.flights) > SOFT_LIMITS["flights"]:
        out.append(f"{len(instance.flights)} flights > {SOFT_LIMITS['flights']}")
    if any(len(f.options) > SOFT_LIMITS["options"] for f in instance.flights):
        out.append(f"a flight has more than {SOFT_LIMITS['options']} options")
    if any(sum(kinds[r] == PCA for r in rt.omega) > SOFT_LIMITS["pcas_per_route"]
           for _, _, _, rt in instance.pairs()):
        out.append(f"a route crosses more than {SOFT_LIMITS['pcas_per_route']} PCAs")
    if instance.horizon + 1 > SOFT_LIMITS["periods"]:
        out.append(f"{instance.horizon + 1} periods > {SOFT_LIMITS['periods']}")
    if instance.n_scenarios > SOFT_LIMITS["scenarios"]:
        out.append(f"{instance.n_scenarios} scenarios > {SOFT_LIMITS['scenarios']}")
    return out
