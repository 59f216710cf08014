"""Airport/PCA network, flights with trajectory options, and instance files.

Periods are integer 15-minute bins counted from program start.  Every
route starts at a departure airport and then visits PCAs, optionally
ending at an exit sink (no capacity).
"""

from __future__ import annotations

import graphlib
import json
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as _FsPath
from typing import Any, Mapping

from .scenario import Branch, ScenarioTree, tree_to_doc, validate_tree

AIRPORT = "airport"
PCA = "pca"
EXIT = "exit-sink"
KINDS = (AIRPORT, PCA, EXIT)

DEFAULT_GROUND_CAP = 16
DEFAULT_AIR_CAP = 4

_ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_.]*$")


class InstanceError(ValueError):
    """Base class for instance problems."""


class ParseError(InstanceError):
    pass


class ValidationError(InstanceError):
    pass


@dataclass(frozen=True)
class Resource:
    id: str
    kind: str


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    travel: int


@dataclass(frozen=True)
class Network:
    resources: tuple[Resource, ...]
    arcs: tuple[Arc, ...]

    @cached_property
    def kinds(self) -> dict[str, str]:
        return {r.id: r.kind for r in self.resources}

    @cached_property
    def travel(self) -> dict[tuple[str, str], int]:
        return {(a.src, a.dst): a.travel for a in self.arcs}

    def ids(self, kind: str) -> list[str]:
        return [r.id for r in self.resources if r.kind == kind]


@dataclass(frozen=True)
class Route:
    """One trajectory option: resource sequence, cost and scheduled crossings."""

    id: str
    cost: float
    omega: tuple[str, ...]
    crossings: tuple[int, ...]

    @property
    def airport(self) -> str:
        return self.omega[0]

    @property
    def final(self) -> str:
        return self.omega[-1]

    @property
    def n_pcas(self) -> int:
        return len(self.omega) - 1


@dataclass(frozen=True)
class Flight:
    id: str
    dep: int
    options: tuple[Route, ...]


@dataclass(frozen=True)
class CostConfig:
    cg: float = 1.0
    ca: float = 2.0


@dataclass(frozen=True)
class DelayCaps:
    ground: int = DEFAULT_GROUND_CAP
    air: int = DEFAULT_AIR_CAP


@dataclass(frozen=True)
class TimeWindow:
    lo: int
    hi: int

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, t: int) -> bool:
        return self.lo <= t <= self.hi


@dataclass(frozen=True)
class Path:
    pcas: tuple[str, ...]

    @property
    def first(self) -> str:
        return self.pcas[0]

    @property
    def last(self) -> str:
        return self.pcas[-1]


@dataclass(frozen=True)
class Instance:
    network: Network
    flights: tuple[Flight, ...]
    costs: CostConfig
    caps: DelayCaps
    scenarios: ScenarioTree
    horizon: int
    meta: Mapping[str, Any] = field(default_factory=dict, compare=False)

    @property
    def n_scenarios(self) -> int:
        return self.scenarios.n_scenarios

    def pairs(self):
        """Yield ``(i, j, flight, route)`` for every trajectory option."""
        for i, f in enumerate(self.flights):
            for j, r in enumerate(f.options):
                yield i, j, f, r

    @property
    def n_options(self) -> int:
        return sum(len(f.options) for f in self.flights)


# --- derived indices -----------------------------------------------------

def window_upper_bounds(instance: Instance) -> int:
    """Latest window end over all (flight, route, resource)."""
    g, a = instance.caps.ground, instance.caps.air
    hi = 0
    for _, _, _, r in instance.pairs():
        k = len(r.omega) - 1
        hi = max(hi, r.crossings[-1] + g + k * a)
    return hi


def derive_time_windows(instance: Instance) -> dict[tuple[int, int, str], TimeWindow]:
    """Allowed admission periods per (flight, route, resource).

    Airport: ``[Dep, Dep + ground]``; the k-th PCA on a route:
    ``[t_k, t_k + ground + k * air]`` where ``t_k`` is the scheduled crossing.
    """
    g, a, H = instance.caps.ground, instance.caps.air, instance.horizon
    out: dict[tuple[int, int, str], TimeWindow] = {}
    for i, j, f, route in instance.pairs():
        for k, (r, t) in enumerate(zip(route.omega, route.crossings)):
            hi = t + g + k * a
            if hi > H:
                raise ValidationError(
                    f"horizon too short: flight {f.id} route {route.id} needs period {hi} "
                    f"at {r}, horizon is {H}"
                )
            out[(i, j, r)] = TimeWindow(t, hi)
    return out


def horizon_extension(network: Network, routes=None) -> int:
    """Longest en-route travel time from a first PCA to the end of a route.

    With ``routes`` given, only those routes count; otherwise every path
    of the network that starts at a PCA reached from an airport.
    """
    if routes is not None:
        return max((r.crossings[-1] - r.crossings[1] for r in routes), default=0)
    kinds = network.kinds
    succ: dict[str, list[tuple[str, int]]] = {}
    for a in network.arcs:
        succ.setdefault(a.src, []).append((a.dst, a.travel))
    memo: dict[str, int] = {}

    def longest(node: str) -> int:
        if node not in memo:
            memo[node] = max((d + longest(n) for n, d in succ.get(node, [])), default=0)
        return memo[node]

    firsts = {a.dst for a in network.arcs if kinds[a.src] == AIRPORT}
    return max((longest(p) for p in firsts), default=0)


def derive_paths(instance: Instance) -> tuple[list[Path], dict[tuple[int, int], int]]:
    """Group routes by the resource sequence after the airport.

    Returns the path list (first-seen order) and a map (flight, route) -> path index.
    """
    paths: list[Path] = []
    index: dict[tuple[str, ...], int] = {}
    of: dict[tuple[int, int], int] = {}
    for i, j, _, r in instance.pairs():
        key = r.omega[1:]
        if key not in index:
            index[key] = len(paths)
            paths.append(Path(key))
        of[(i, j)] = index[key]
    return paths, of


def crossing_index(instance: Instance) -> dict[str, list[tuple[int, int]]]:
    """PCA (or sink) -> list of (flight, route) pairs whose route visits it."""
    phi: dict[str, list[tuple[int, int]]] = {
        r.id: [] for r in instance.network.resources if r.kind != AIRPORT
    }
    for i, j, _, r in instance.pairs():
        for res in r.omega[1:]:
            phi[res].append((i, j))
    return phi


# --- validation ----------------------------------------------------------

def validate_instance(inst: Instance) -> list[str]:
    """Return a list of invariant violations (empty when valid)."""
    errs: list[str] = []
    net = inst.network
    ids = [r.id for r in net.resources]
    if len(set(ids)) != len(ids):
        errs.append("duplicate resource id")
    for r in net.resources:
        if r.kind not in KINDS:
            errs.append(f"resource {r.id}: unknown kind {r.kind!r}")
        if not _ID_RE.match(r.id):
            errs.append(f"resource {r.id!r}: ids must match {_ID_RE.pattern}")
    kinds = net.kinds
    seen_arcs = set()
    for a in net.arcs:
        for end in (a.src, a.dst):
            if end not in kinds:
                errs.append(f"arc {a.src}->{a.dst}: unknown resource {end}")
        if (a.src, a.dst) in seen_arcs:
            errs.append(f"arc {a.src}->{a.dst}: duplicate")
        seen_arcs.add((a.src, a.dst))
        if not isinstance(a.travel, int) or a.travel < 0:
            errs.append(f"arc {a.src}->{a.dst}: travel must be a non-negative integer")
        if kinds.get(a.dst) == AIRPORT:
            errs.append(f"arc {a.src}->{a.dst}: airports cannot be entered")
        if kinds.get(a.src) == EXIT:
            errs.append(f"arc {a.src}->{a.dst}: exit sinks cannot be left")
    if errs:
        return errs
    ts = graphlib.TopologicalSorter({n: set() for n in kinds})
    for a in net.arcs:
        ts.add(a.dst, a.src)
    try:
        ts.prepare()
    except graphlib.CycleError:
        errs.append("network is not acyclic")

    travel = net.travel
    if inst.costs.cg <= 0 or inst.costs.ca < inst.costs.cg:
        errs.append("costs must satisfy ca >= cg > 0")
    if inst.caps.ground < 0 or inst.caps.air < 0:
        errs.append("delay caps must be non-negative")
    if not inst.flights:
        errs.append("no flights")
    fids = [f.id for f in inst.flights]
    if len(set(fids)) != len(fids):
        errs.append("duplicate flight id")
    for f in inst.flights:
        if not f.options:
            errs.append(f"flight {f.id}: empty option set")
            continue
        if f.dep < 0:
            errs.append(f"flight {f.id}: negative departure period")
        oids = [r.id for r in f.options]
        if len(set(oids)) != len(oids):
            errs.append(f"flight {f.id}: duplicate option id")
        airports = {r.omega[0] for r in f.options if r.omega}
        if len(airports) > 1:
            errs.append(f"flight {f.id}: options depart from different airports {sorted(airports)}")
        for r in f.options:
            where = f"flight {f.id} route {r.id}"
            if len(r.omega) < 2:
                errs.append(f"{where}: needs an airport and at least one downstream resource")
                continue
            unknown = [x for x in r.omega if x not in kinds]
            if unknown:
                errs.append(f"{where}: unknown resource {unknown[0]}")
                continue
            if len(set(r.omega)) != len(r.omega):
                errs.append(f"{where}: resource visited twice")
            if kinds[r.omega[0]] != AIRPORT:
                errs.append(f"{where}: must start at an airport")
            for pos, x in enumerate(r.omega[1:], start=1):
                if kinds[x] == AIRPORT:
                    errs.append(f"{where}: airport {x} after departure")
                if kinds[x] == EXIT and pos != len(r.omega) - 1:
                    errs.append(f"{where}: exit sink {x} must be last")
            if r.cost < 0:
                errs.append(f"{where}: negative route cost")
            if len(r.crossings) != len(r.omega):
                errs.append(f"{where}: crossings do not cover the route")
                continue
            if r.crossings[0] != f.dep:
                errs.append(f"{where}: crossing at {r.omega[0]} must equal dep {f.dep}")
            for (x, y), (tx, ty) in zip(
                zip(r.omega, r.omega[1:]), zip(r.crossings, r.crossings[1:])
            ):
                if (x, y) not in travel:
                    errs.append(f"{where}: {x}->{y} is not an arc")
                elif ty - tx != travel[(x, y)]:
                    errs.append(
                        f"{where}: crossing at {y} is {ty}, expected {tx + travel[(x, y)]}"
                    )
    if errs:
        return errs
    errs.extend(validate_tree(inst.scenarios, inst.horizon, net.ids(PCA)))
    need = window_upper_bounds(inst)
    if need > inst.horizon:
        errs.append(f"horizon too short: windows reach period {need}, horizon is {inst.horizon}")
    return errs


def check_instance(inst: Instance) -> Instance:
    errs = validate_instance(inst)
    if errs:
        raise ValidationError("; ".join(errs))
    return inst


# --- file format ---------------------------------------------------------

_TOP_KEYS = {"network", "flights", "costs", "caps", "scenarios", "horizon", "meta"}
_REQUIRED_TOP = _TOP_KEYS - {"meta"}


def _keys(obj: Any, where: str, allowed: set[str], required: set[str] | None = None) -> dict:
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ParseError(f"{where}: unknown key {unknown[0]!r}")
    missing = sorted((allowed if required is None else required) - set(obj))
    if missing:
        raise ParseError(f"{where}: missing key {missing[0]!r}")
    return obj


def _int(v: Any, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{where}: expected an integer")
    return v


def _num(v: Any, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number")
    return v


def _list(v: Any, where: str) -> list:
    if not isinstance(v, list):
        raise ParseError(f"{where}: expected a list")
    return v


def _str(v: Any, where: str) -> str:
    if not isinstance(v, str):
        raise ParseError(f"{where}: expected a string")
    return v


def instance_from_doc(doc: Any) -> Instance:
    """Build and validate an Instance from a parsed JSON tree."""
    _keys(doc, "instance", _TOP_KEYS, _REQUIRED_TOP)
    net = _keys(doc["network"], "network", {"resources", "arcs"})
    resources = []
    for n, r in enumerate(_list(net["resources"], "network.resources")):
        w = f"network.resources[{n}]"
        _keys(r, w, {"id", "kind"})
        resources.append(Resource(_str(r["id"], w + ".id"), _str(r["kind"], w + ".kind")))
    arcs = []
    for n, a in enumerate(_list(net["arcs"], "network.arcs")):
        w = f"network.arcs[{n}]"
        _keys(a, w, {"from", "to", "travel"})
        arcs.append(Arc(_str(a["from"], w + ".from"), _str(a["to"], w + ".to"),
                        _int(a["travel"], w + ".travel")))
    network = Network(tuple(resources), tuple(arcs))
    travel = network.travel

    flights = []
    for n, f in enumerate(_list(doc["flights"], "flights")):
        w = f"flights[{n}]"
        _keys(f, w, {"id", "dep", "options"})
        dep = _int(f["dep"], w + ".dep")
        options = []
        for m, o in enumerate(_list(f["options"], w + ".options")):
            wo = f"{w}.options[{m}]"
            _keys(o, wo, {"id", "cost", "omega", "crossings"}, {"id", "cost", "omega"})
            omega = tuple(_str(x, f"{wo}.omega") for x in _list(o["omega"], wo + ".omega"))
            if "crossings" in o:
                cr = _keys(o["crossings"], wo + ".crossings", set(omega), set(omega))
                crossings = tuple(_int(cr[x], f"{wo}.crossings.{x}") for x in omega)
            else:
                # derive from travel times; validation reports unknown arcs
                crossings = [dep]
                for x, y in zip(omega, omega[1:]):
                    crossings.append(crossings[-1] + travel.get((x, y), 0))
                crossings = tuple(crossings)
            options.append(Route(_str(o["id"], wo + ".id"), _num(o["cost"], wo + ".cost"),
                                 omega, crossings))
        flights.append(Flight(_str(f["id"], w + ".id"), dep, tuple(options)))

    c = _keys(doc["costs"], "costs", {"cg", "ca"})
    costs = CostConfig(_num(c["cg"], "costs.cg"), _num(c["ca"], "costs.ca"))
    k = _keys(doc["caps"], "caps", {"ground", "air"})
    caps = DelayCaps(_int(k["ground"], "caps.ground"), _int(k["air"], "caps.air"))

    s = _keys(doc["scenarios"], "scenarios", {"probabilities", "capacities", "branches"})
    probs = tuple(float(_num(p, "scenarios.probabilities")) for p in
                  _list(s["probabilities"], "scenarios.probabilities"))
    capdoc = s["capacities"]
    if not isinstance(capdoc, dict):
        raise ParseError("scenarios.capacities: expected an object")
    capacities = {}
    for pca, per in capdoc.items():
        w = f"scenarios.capacities.{pca}"
        if not isinstance(per, dict):
            raise ParseError(f"{w}: expected an object keyed by scenario")
        want = {str(q) for q in range(len(probs))}
        _keys(per, w, want)
        capacities[pca] = tuple(
            tuple(_int(v, f"{w}.{q}") for v in _list(per[str(q)], f"{w}.{q}"))
            for q in range(len(probs))
        )
    branches = []
    for n, b in enumerate(_list(s["branches"], "scenarios.branches")):
        w = f"scenarios.branches[{n}]"
        _keys(b, w, {"start", "end", "scenarios"})
        branches.append(Branch(_int(b["start"], w + ".start"), _int(b["end"], w + ".end"),
                               tuple(_int(q, w + ".scenarios") for q in
                                     _list(b["scenarios"], w + ".scenarios"))))
    tree = ScenarioTree(probs, capacities, tuple(branches))
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise ParseError("meta: expected an object")
    inst = Instance(network, tuple(flights), costs, caps, tree,
                    _int(doc["horizon"], "horizon"), meta)
    return check_instance(inst)


def load_instance(document: str) -> Instance:
    """Parse instance text (JSON) and validate it."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise ParseError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    return instance_from_doc(doc)


def read_instance(path) -> Instance:
    return load_instance(_FsPath(path).read_text())


def instance_to_doc(inst: Instance) -> dict:
    doc = {
        "network": {
            "resources": [{"id": r.id, "kind": r.kind} for r in inst.network.resources],
            "arcs": [{"from": a.src, "to": a.dst, "travel": a.travel} for a in inst.network.arcs],
        },
        "flights": [
            {
                "id": f.id,
                "dep": f.dep,
                "options": [
                    {
                        "id": r.id,
                        "cost": r.cost,
                        "omega": list(r.omega),
                        "crossings": dict(zip(r.omega, r.crossings)),
                    }
                    for r in f.options
                ],
            }
            for f in inst.flights
        ],
        "costs": {"cg": inst.costs.cg, "ca": inst.costs.ca},
        "caps": {"ground": inst.caps.ground, "air": inst.caps.air},
        "scenarios": tree_to_doc(inst.scenarios),
        "horizon": inst.horizon,
    }
    if inst.meta:
        doc["meta"] = dict(inst.meta)
    return doc


def dump_instance(inst: Instance) -> str:
    """Deterministic JSON text; capacity rows are kept on one line each."""
    text = json.dumps(instance_to_doc(inst), indent=1)
    # collapse integer lists onto single lines to keep files readable
    return re.sub(
        r"\[\n\s*((?:-?\d+,\n\s*)*-?\d+)\n\s*\]",
        lambda m: "[" + re.sub(r",\n\s*", ", ", m.group(1)) + "]",
        text,
    ) + "\n"


def write_instance(inst: Instance, path) -> None:
    _FsPath(path).write_text(dump_instance(inst))
