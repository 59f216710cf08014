"""Seeded instance generators: synthetic layered networks and the EWR case study.

All randomness flows through ``numpy.random.default_rng(seed)`` so equal
arguments give byte-identical instance files.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from importlib import resources as _res

import numpy as np

from .instance import (
    AIRPORT, EXIT, PCA, Arc, CostConfig, DelayCaps, Flight, Instance, Network, Resource, Route,
    check_instance, window_upper_bounds,
)
from .scenario import Branch, ScenarioTree

PROGRAM_START = (20, 0)   # 20:00Z, first column of the capacity table
PERIOD_MINUTES = 15


class GenerationError(ValueError):
    pass


def period_label(t: int) -> str:
    """Clock label of period ``t`` counted from the 20:00Z program start."""
    m = PROGRAM_START[0] * 60 + PROGRAM_START[1] + PERIOD_MINUTES * t
    return f"{(m // 60) % 24:02d}:{m % 60:02d}"


# --- shared helpers ------------------------------------------------------

def _route(rid: str, cost: float, omega, dep: int, travel) -> Route:
    cr = [dep]
    for a, b in zip(omega, omega[1:]):
        cr.append(cr[-1] + travel[(a, b)])
    return Route(rid, float(cost), tuple(omega), tuple(cr))


def _stratified_counts(rng, n: int, mean: float, cap: int) -> list[int]:
    """Option counts from a geometric law on {1..cap}, drawn by stratified sampling.

    The success probability is tuned so the capped law has the requested
    mean; stratification keeps the total close to ``n * mean``.
    """
    if mean <= 1.0 or cap <= 1:
        return [1] * n

    def capped_mean(p):
        pk = [p * (1 - p) ** (k - 1) for k in range(1, cap)]
        pk.append(1 - sum(pk))
        return sum((k + 1) * v for k, v in enumerate(pk)), pk

    mean = min(mean, cap - 1e-9)
    lo, hi = 1e-6, 1.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if capped_mean(mid)[0] > mean:
            lo = mid
        else:
            hi = mid
    _, pk = capped_mean((lo + hi) / 2)
    cdf = np.cumsum(pk)
    u = (rng.permutation(n) + rng.random(n)) / n
    return [int(min(np.searchsorted(cdf, x, side="right") + 1, cap)) for x in u]


def _fcfs_repair(flights, pcas, caps_by_q, ground: int, kinds) -> None:
    """Make every flight's original route fit the scenario-wise minimum capacity.

    Flights are placed first-come first-served on their original route
    with ground delay only; a flight that cannot be placed within its
    ground window raises the capacity of the cells it occupies on time, in
    every scenario where that cell is short.  ``caps_by_q`` is mutated.
    """
    Q = len(caps_by_q[pcas[0]])
    T = len(caps_by_q[pcas[0]][0])
    env = {k: [min(caps_by_q[k][q][t] for q in range(Q)) for t in range(T)] for k in pcas}
    used = {k: [0] * T for k in pcas}
    order = sorted(range(len(flights)), key=lambda i: (flights[i].dep, i))
    for i in order:
        r = flights[i].options[0]
        cells = [(res, t) for res, t in zip(r.omega, r.crossings) if kinds[res] == PCA]
        placed = False
        for g in range(ground + 1):
            if all(t + g < T and used[k][t + g] < env[k][t + g] for k, t in cells):
                for k, t in cells:
                    used[k][t + g] += 1
                placed = True
                break
        if not placed:
            for k, t in cells:
                used[k][t] += 1
                if used[k][t] > env[k][t]:
                    env[k][t] = used[k][t]
                    for q in range(Q):
                        caps_by_q[k][q][t] = max(caps_by_q[k][q][t], used[k][t])


# --- synthetic instances -------------------------------------------------

@dataclass(frozen=True)
class SynthParams:
    airports: int = 2
    pcas: int = 2
    flights: int = 3
    tos_mean: float = 1.5
    periods: int = 10
    scenarios: int = 2
    branch_points: int = 1
    tightness: float = 0.5
    seed: int = 1
    ground: int = 16
    air: int = 4
    cg: float = 1.0
    ca: float = 2.0
    max_options: int = 4


def _comb_tree(rng, Q: int, n_branch: int, periods: int, H: int):
    """Branch periods and branches of a comb tree (one scenario peels off per split)."""
    if Q == 1:
        return [], (Branch(0, H, (0,)),)
    if not 1 <= n_branch <= Q - 1:
        raise GenerationError(f"branch points must be in [1, {Q - 1}] for {Q} scenarios")
    if periods - 1 < n_branch:
        raise GenerationError("not enough periods for the requested branch points")
    taus = sorted(int(x) for x in rng.choice(np.arange(1, periods), size=n_branch, replace=False))
    branches = []
    group = list(range(Q))
    start = 0
    for k, tau in enumerate(taus):
        branches.append(Branch(start, tau - 1, tuple(group)))
        if k == n_branch - 1:
            for q in group:
                branches.append(Branch(tau, H, (q,)))
        else:
            branches.append(Branch(tau, H, (group[0],)))
            group = group[1:]
        start = tau
    return taus, tuple(branches)


def synth_instance(params: SynthParams | None = None, **kw) -> Instance:
    """Seeded layered airport -> PCA (-> PCA) -> exit instance."""
    p = dataclasses.replace(params or SynthParams(), **kw)
    if p.flights > 0 and p.pcas <= 0:
        raise GenerationError("flights need at least one PCA")
    if min(p.airports, p.flights, p.periods, p.scenarios) <= 0:
        raise GenerationError("airports, flights, periods and scenarios must be positive")
    if p.tos_mean < 1:
        raise GenerationError("tos-mean must be at least 1")
    if not 0 <= p.tightness <= 1:
        raise GenerationError("capacity tightness must be in [0, 1]")
    rng = np.random.default_rng(p.seed)
    aps = [f"A{n}" for n in range(p.airports)]
    pcas = [f"P{n}" for n in range(p.pcas)]
    n1 = max(1, math.ceil(p.pcas / 2))
    layer1, layer2 = pcas[:n1], pcas[n1:]
    resources = [Resource(a, AIRPORT) for a in aps] + [Resource(k, PCA) for k in pcas] + [Resource("X", EXIT)]
    arcs = []
    for a in aps:
        for k in layer1:
            arcs.append(Arc(a, k, int(rng.integers(1, 3))))
    for k in layer1:
        for k2 in layer2:
            arcs.append(Arc(k, k2, int(rng.integers(1, 3))))
    for k in pcas:
        arcs.append(Arc(k, "X", 1))
    net = Network(tuple(resources), tuple(arcs))
    travel = net.travel
    # candidate resource sequences after each airport: one or two PCAs, then exit
    seqs = [(k, "X") for k in layer1] + [(k, k2, "X") for k in layer1 for k2 in layer2]

    counts = _stratified_counts(rng, p.flights, p.tos_mean, p.max_options)
    flights = []
    for i in range(p.flights):
        a = aps[int(rng.integers(len(aps)))]
        dep = int(rng.integers(p.periods))
        order = [seqs[x] for x in rng.permutation(len(seqs))]
        n_opt = min(counts[i], len(order))
        opts = [_route("r0", 0, (a,) + order[0], dep, travel)]
        for m in range(1, n_opt):
            opts.append(_route(f"r{m}", int(rng.integers(1, 4)), (a,) + order[m], dep, travel))
        flights.append(Flight(f"F{i}", dep, tuple(opts)))

    probe = Instance(net, tuple(flights), CostConfig(p.cg, p.ca), DelayCaps(p.ground, p.air),
                     ScenarioTree((1.0,), {}, (Branch(0, 0, (0,)),)), 0)
    H = max(window_upper_bounds(probe), p.periods - 1)
    Q = p.scenarios
    taus, branches = _comb_tree(rng, Q, min(p.branch_points, Q - 1) if Q > 1 else 0, p.periods, H)

    # nominal capacity: peak per-period demand if every option were flown on time
    kinds = net.kinds
    demand = {k: [0] * (H + 1) for k in pcas}
    for f in flights:
        for r in f.options:
            for res, t in zip(r.omega, r.crossings):
                if kinds[res] == PCA:
                    demand[res][t] += 1
    nominal = {k: max(1, max(demand[k])) for k in pcas}
    reduced = {k: max(1, int(math.floor(nominal[k] * (1 - p.tightness)))) for k in pcas}
    # scenarios peeled off the comb recover to nominal capacity at their
    # branch period; the group separated at the last branch point spreads
    # from full recovery down to staying reduced for the whole program
    nb = len(taus)
    level = [1.0] * Q      # share of the drop recovered after the scenario's split
    recover = [H + 1] * Q
    for q in range(Q):
        if nb and q < nb - 1:
            recover[q] = taus[q]
        elif nb:
            rest = Q - (nb - 1)
            m = q - (nb - 1)
            recover[q] = taus[-1]
            level[q] = 1.0 - m / (rest - 1)
    # the drop lasts through the program plus the airport-to-PCA travel, so
    # flights departing late in the program still meet it
    end = p.periods + max((a.travel for a in arcs if a.src in aps), default=0)
    caps = {}
    for k in pcas:
        rows = []
        for q in range(Q):
            late = reduced[k] + int(round((nominal[k] - reduced[k]) * level[q]))
            rows.append([reduced[k] if t < recover[q] else (late if t < end else nominal[k])
                         for t in range(H + 1)])
        caps[k] = rows
    _fcfs_repair(flights, pcas, caps, p.ground, kinds)
    tree = ScenarioTree(tuple([1.0 / Q] * Q),
                        {k: tuple(tuple(row) for row in caps[k]) for k in pcas}, branches)
    meta = {"generator": "synth", "seed": p.seed, "params": dataclasses.asdict(p)}
    return check_instance(Instance(net, tuple(flights), CostConfig(p.cg, p.ca), DelayCaps(p.ground, p.air),
                                   tree, H, meta))


def strip_tos(instance: Instance) -> Instance:
    """Keep only each flight's first (original, zero-cost) option."""
    flights = tuple(dataclasses.replace(f, options=f.options[:1]) for f in instance.flights)
    meta = dict(instance.meta)
    meta["tos"] = "stripped"
    return check_instance(dataclasses.replace(instance, flights=flights, meta=meta))


def tiny_instance() -> Instance:
    """T1: two flights from different airports through one PCA of capacity one.

    Scenario 1 loses the PCA's capacity in period 1; the scenarios split at
    period 1.
    """
    H = 8
    net = Network(
        (Resource("A", AIRPORT), Resource("B", AIRPORT), Resource("P", PCA), Resource("X", EXIT)),
        (Arc("A", "P", 1), Arc("B", "P", 1), Arc("P", "X", 1)),
    )
    tr = net.travel
    flights = (
        Flight("f1", 0, (_route("r0", 0, ("A", "P", "X"), 0, tr),)),
        Flight("f2", 0, (_route("r0", 0, ("B", "P", "X"), 0, tr),)),
    )
    cap = {"P": ((1,) * (H + 1), (1, 0) + (1,) * (H - 1))}
    tree = ScenarioTree((0.5, 0.5), cap,
                        (Branch(0, 0, (0, 1)), Branch(1, H, (0,)), Branch(1, H, (1,))))
    return check_instance(Instance(net, flights, CostConfig(1.0, 2.0), DelayCaps(2, 2), tree, H,
                                   {"generator": "tiny", "name": "T1"}))


def tiny_corpus(n: int = 12) -> list[Instance]:
    """T1 plus seeded tiny congested instances that fit the oracle budget."""
    out = [tiny_instance()]
    seed = 0
    while len(out) < n:
        seed += 1
        periods = 2 + seed % 2
        out.append(synth_instance(SynthParams(
            airports=2, pcas=periods - 1, flights=3, tos_mean=1.5, periods=periods,
            scenarios=2 + (seed // 2) % 2, branch_points=1, tightness=0.7, seed=seed,
            ground=2, air=1, max_options=2,
        )))
    return out


def desk_instance(seed: int, flights: int = 50, tos_mean: float = 1.5) -> Instance:
    """Desk-scale instance: ~50 flights, 3 scenarios, ~30 periods."""
    return synth_instance(SynthParams(
        airports=4, pcas=4, flights=flights, tos_mean=tos_mean, periods=16, scenarios=3, branch_points=2,
        tightness=0.5, seed=seed, ground=4, air=2,
    ))


# --- case study ----------------------------------------------------------

CASE_PCAS = ("PCA0", "PCA1", "PCA2", "EWR")
CASE_NOMINAL = {"PCA0": 25, "PCA1": 50, "PCA2": 5, "EWR": 10}
CASE_PROGRAM_PERIODS = 16          # 20:00Z-23:45Z
CASE_FLIGHTS = 890
CASE_TOS_MEAN = 1.54
# en-route travel times (periods); PCA2 -> PCA0 -> EWR is the longest chain, 8 periods
CASE_ARCS = {
    ("PCA2", "PCA0"): 3, ("PCA0", "EWR"): 5, ("PCA2", "EWR"): 6, ("PCA1", "EWR"): 3,
    ("PCA1", "X"): 2, ("PCA0", "X"): 2, ("PCA2", "X"): 2,
}
CASE_AIRPORTS = 8
# original-path mix (sequence after the airport -> share of flights)
CASE_PATH_MIX = {
    ("PCA1", "X"): 520, ("PCA0", "X"): 180, ("PCA2", "X"): 50, ("PCA1", "EWR"): 80,
    ("PCA0", "EWR"): 40, ("PCA2", "EWR"): 10, ("PCA2", "PCA0", "EWR"): 10,
}


def read_table1() -> dict[str, list[list[int]]]:
    """Capacity table shipped with the package: {pca: [scenario rows]}."""
    text = _res.files("ctopsp.data").joinpath("table1_capacities.csv").read_text()
    rows = list(csv.reader(text.splitlines()))
    out: dict[str, list[list[int]]] = {}
    for r in rows[1:]:
        out.setdefault(r[1], []).append([int(v) for v in r[2:]])
    return out


def table1_text() -> str:
    return _res.files("ctopsp.data").joinpath("table1_capacities.csv").read_text()


def case_tree(H: int) -> ScenarioTree:
    """Three scenarios; scenario 1 splits at 21:00Z, scenarios 2 and 3 at 22:30Z."""
    table = read_table1()
    caps = {}
    for k in CASE_PCAS:
        rows = table[k]
        caps[k] = tuple(tuple(row[: H + 1]) + (CASE_NOMINAL[k],) * max(0, H + 1 - len(row)) for row in rows)
    b1, b2 = 4, 10
    branches = (Branch(0, b1 - 1, (0, 1, 2)), Branch(b1, H, (0,)), Branch(b1, b2 - 1, (1, 2)),
                Branch(b2, H, (1,)), Branch(b2, H, (2,)))
    return ScenarioTree((1 / 3, 1 / 3, 1 / 3), caps, branches)


def case_network(seed: int = 0) -> Network:
    rng = np.random.default_rng([seed, 7])
    aps = [f"AP{n}" for n in range(CASE_AIRPORTS)]
    res = [Resource(a, AIRPORT) for a in aps] + [Resource(k, PCA) for k in CASE_PCAS] + [Resource("X", EXIT)]
    arcs = [Arc(a, k, int(rng.integers(1, 4))) for a in aps for k in ("PCA0", "PCA1", "PCA2")]
    arcs += [Arc(s, d, t) for (s, d), t in CASE_ARCS.items()]
    return Network(tuple(res), tuple(arcs))


def build_case_study(demand_seed: int = 0, n_flights: int = CASE_FLIGHTS, tos_mean: float = CASE_TOS_MEAN,
                     ground: int = 16, air: int = 4) -> Instance:
    """EWR/ZDC-style case study with synthetic demand.

    Network, capacity table and scenario tree are fixed; flights, their
    departures and options are drawn from ``demand_seed``.
    """
    net = case_network(demand_seed)
    tr = net.travel
    rng = np.random.default_rng(demand_seed)
    aps = [r.id for r in net.resources if r.kind == AIRPORT]
    seqs = list(CASE_PATH_MIX)
    weights = np.array([CASE_PATH_MIX[s] for s in seqs], dtype=float)
    # stratified path assignment keeps the mix close to the target shares
    quota = np.floor(weights / weights.sum() * n_flights).astype(int)
    quota[0] += n_flights - quota.sum()
    path_of = np.repeat(np.arange(len(seqs)), quota)
    rng.shuffle(path_of)
    counts = _stratified_counts(rng, n_flights, tos_mean, 4)
    flights = []
    for i in range(n_flights):
        seq = seqs[path_of[i]]
        a = aps[int(rng.integers(len(aps)))]
        dep = int(rng.integers(CASE_PROGRAM_PERIODS))
        # alternates keep the destination (EWR or exit)
        alts = [s for s in seqs if s != seq and s[-1] == seq[-1]]
        alts = [alts[x] for x in rng.permutation(len(alts))]
        opts = [_route("r0", 0, (a,) + seq, dep, tr)]
        for m in range(1, min(counts[i], len(alts) + 1)):
            opts.append(_route(f"r{m}", int(rng.integers(1, 5)), (a,) + alts[m - 1], dep, tr))
        flights.append(Flight(f"F{i:03d}", dep, tuple(opts)))
    probe = Instance(net, tuple(flights), CostConfig(1.0, 2.0), DelayCaps(ground, air),
                     ScenarioTree((1.0,), {}, (Branch(0, 0, (0,)),)), 0)
    H = max(window_upper_bounds(probe), 23)
    tree = case_tree(H)
    meta = {"generator": "case-study", "demand_seed": demand_seed}
    return check_instance(Instance(net, tuple(flights), CostConfig(1.0, 2.0), DelayCaps(ground, air),
                                   tree, H, meta))
