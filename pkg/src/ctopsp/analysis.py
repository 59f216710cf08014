"""Decode solver output, check it, and tabulate model comparisons."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .instance import PCA, Instance, derive_time_windows
from .mip import SolverError, max_fractionality, relax
from .mip.result import OPTIMAL
from .modelgen import build_model
from .modelgen.eulerian import GROUND_CG
from .modelgen.varmap import (
    A, DELTA, DELTA_Q, DYNAMIC, EULERIAN, FAMILIES, LAGRANGIAN, POLICIES, SEMI_DYNAMIC, TWO_STAGE, W,
    VarMap,
)
from .oracle import FlightDecision, Policy, evaluate_policy
from .scenario import ScenarioTree, project_scenario

INT_TOL = 1e-6
PI = "perfect-information"


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class FlightPlan:
    flight: int
    scheduled: int
    route: int
    departure: int
    admissions: tuple[int, ...]   # per resource of the route; only the departure for L-E plans
    ground: int
    air: int | None               # None when the model aggregates air holding


@dataclass
class FlightPlanSet:
    family: str
    policy: str
    plans: list[list[FlightPlan]]          # plans[q][i]
    aggregate_air: list[float] | None = None   # L-E: sum of A per scenario

    @property
    def n_scenarios(self) -> int:
        return len(self.plans)


def _jump(values: list[tuple[int, float]]) -> int | None:
    for t, v in sorted(values):
        if v > 0.5:
            return t
    return None


def decode_solution(varmap: VarMap, result, instance: Instance, tol: float = INT_TOL) -> FlightPlanSet:
    """Turn an integral solution into per-scenario flight plans.

    Admission periods are the jump periods of the w trajectories.
    """
    if result.status != OPTIMAL:
        raise DecodeError(f"cannot decode a {result.status} result")
    x = np.asarray(result.x, dtype=float)
    cols = np.asarray(varmap.flight_columns(), dtype=np.int64)
    if len(cols):
        frac = np.abs(x[cols] - np.round(x[cols]))
        if frac.max() > tol:
            raise DecodeError("fractional solution; decode unsupported")
    Q = varmap.n_scenarios
    traj: dict[tuple, list[tuple[int, float]]] = {}
    chosen: dict[tuple, float] = {}
    air = [0.0] * Q
    for col, k in enumerate(varmap.keys):
        if k.kind == W:
            traj.setdefault((k.flight, k.route, k.resource, k.scenario), []).append((k.period, x[col]))
        elif k.kind == DELTA:
            chosen[(k.flight, k.route, None)] = x[col]
        elif k.kind == DELTA_Q:
            chosen[(k.flight, k.route, k.scenario)] = x[col]
        elif k.kind == A:
            air[k.scenario] += x[col]
    two = varmap.policy == TWO_STAGE
    euler = varmap.family == EULERIAN
    plans: list[list[FlightPlan]] = []
    for q in range(Q):
        row = []
        for i, f in enumerate(instance.flights):
            js = [j for j in range(len(f.options)) if chosen.get((i, j, None if two else q), 0.0) > 0.5]
            if len(js) != 1:
                raise DecodeError(f"flight {f.id} scenario {q}: {len(js)} routes selected")
            j = js[0]
            route = f.options[j]
            aq = None if two else q
            dep = _jump(traj[(i, j, route.omega[0], aq)])
            if dep is None:
                raise DecodeError(f"flight {f.id} scenario {q}: no departure period")
            g = dep - f.dep
            if euler:
                row.append(FlightPlan(i, f.dep, j, dep, (dep,), g, None))
                continue
            adm = [dep]
            for r in route.omega[1:]:
                t = _jump(traj[(i, j, r, q)])
                if t is None:
                    raise DecodeError(f"flight {f.id} scenario {q}: never admitted to {r}")
                adm.append(t)
            a = adm[-1] - route.crossings[-1] - g
            row.append(FlightPlan(i, f.dep, j, dep, tuple(adm), g, a))
        plans.append(row)
    return FlightPlanSet(varmap.family, varmap.policy, plans, air if euler else None)


def verify_feasibility(plans: FlightPlanSet, instance: Instance) -> list[str]:
    """Re-simulate the plans; list capacity, travel-time and window violations.

    Plans from aggregate models carry only departures, so only the
    departure windows are checked for them.
    """
    out: list[str] = []
    wins = derive_time_windows(instance)
    travel = instance.network.travel
    kinds = instance.network.kinds
    tree = instance.scenarios
    count: dict[tuple[str, int, int], int] = {}
    for q, row in enumerate(plans.plans):
        for p in row:
            f = instance.flights[p.flight]
            route = f.options[p.route]
            for k, t in enumerate(p.admissions):
                r = route.omega[k]
                w = wins[(p.flight, p.route, r)]
                if t not in w:
                    out.append(f"window: flight {f.id} scenario {q} at {r} period {t} outside [{w.lo},{w.hi}]")
                if k:
                    need = p.admissions[k - 1] + travel[(route.omega[k - 1], r)]
                    if t < need:
                        out.append(f"travel: flight {f.id} scenario {q} admitted to {r} at {t} before {need}")
                    if kinds[r] == PCA:
                        count[(r, t, q)] = count.get((r, t, q), 0) + 1
    for (r, t, q), n in sorted(count.items()):
        if t > instance.horizon:
            out.append(f"window: {r} period {t} beyond horizon")
            continue
        m = tree.capacity(r, t, q)
        if n > m:
            out.append(f"capacity: {r} period {t} scenario {q}: {n} admitted, capacity {m}")
    return out


def check_nonanticipativity(plans: FlightPlanSet, tree: ScenarioTree, policy_class: str):
    """(ok, first counterexample or None) for the route/departure decisions."""
    Q = len(plans.plans)
    if Q <= 1:
        return True, None
    nf = len(plans.plans[0])
    for i in range(nf):
        key = [(plans.plans[q][i].route, plans.plans[q][i].departure) for q in range(Q)]
        dep = plans.plans[0][i].scheduled
        if policy_class == TWO_STAGE:
            for q in range(1, Q):
                if key[q] != key[0]:
                    return False, f"flight {i}: scenarios 0 and {q} differ: {key[0]} vs {key[q]}"
        elif policy_class == SEMI_DYNAMIC:
            for b in tree.branches:
                if b.active(dep):
                    for q in b.scenarios[1:]:
                        if key[q] != key[b.scenarios[0]]:
                            return False, (f"flight {i}: scenarios {b.scenarios[0]} and {q} share the branch "
                                           f"at period {dep} but decide {key[b.scenarios[0]]} vs {key[q]}")
        elif policy_class == DYNAMIC:
            for q1 in range(Q):
                for q2 in range(q1 + 1, Q):
                    if key[q1] == key[q2]:
                        continue
                    s = tree.split_period(q1, q2)
                    if s is None or min(key[q1][1], key[q2][1]) < s:
                        return False, (f"flight {i}: scenarios {q1} and {q2} decide {key[q1]} vs {key[q2]} "
                                       f"before they separate at period {s}")
        else:
            raise ValueError(f"unknown policy class {policy_class!r}")
    return True, None


def plans_to_policy(plans: FlightPlanSet) -> Policy:
    """Oracle policy for full (per-resource) plans."""
    if plans.aggregate_air is not None:
        raise ValueError("aggregate plans carry no per-flight admissions")
    nf = len(plans.plans[0]) if plans.plans else 0
    dec = tuple(
        tuple(FlightDecision(p.route, p.departure, p.admissions) for p in (plans.plans[q][i] for q in range(plans.n_scenarios)))
        for i in range(nf)
    )
    return Policy(plans.policy if plans.policy in POLICIES else TWO_STAGE, dec)


@dataclass(frozen=True)
class ScenarioBreakdown:
    ground: int
    air: float
    route_cost: float
    cost: float


def breakdown(plans: FlightPlanSet, instance: Instance) -> list[ScenarioBreakdown]:
    cg, ca = instance.costs.cg, instance.costs.ca
    out = []
    for q, row in enumerate(plans.plans):
        ground = sum(p.ground for p in row)
        if plans.aggregate_air is not None:
            air = float(plans.aggregate_air[q])
        else:
            air = sum(p.air for p in row)
        rc = sum(instance.flights[p.flight].options[p.route].cost for p in row)
        out.append(ScenarioBreakdown(ground, air, rc, rc + cg * ground + ca * air))
    return out


def expected(values, probabilities) -> float:
    e = 0.0
    for p, v in zip(probabilities, values):
        e = e + p * v
    return float(e)


# --- solving and reporting ----------------------------------------------

@dataclass
class VariantRow:
    variant: str
    family: str
    policy: str
    expected_cost: float = math.nan
    objective: float = math.nan
    ground: list = field(default_factory=list)
    air: list = field(default_factory=list)
    route_cost: list = field(default_factory=list)
    lp_integral: bool | None = None
    max_frac: float = math.nan
    wall_ms: float = 0.0
    error: str = ""
    plans: FlightPlanSet | None = None
    lp_objective: float = math.nan
    mip_objective: float = math.nan
    eval_cost: float = math.nan        # expected cost re-evaluated from the decoded plans
    accounting_gap: float = math.nan   # |eval_cost - solver objective|


def solve_variant(instance: Instance, family: str, policy: str, solver, int_tol: float = INT_TOL,
                  ground: str = GROUND_CG, mip_solver=None) -> VariantRow:
    """Build, solve the LP relaxation (then the MIP if fractional), decode and verify."""
    row = VariantRow(f"{family}/{policy}", family, policy)
    start = time.perf_counter()
    try:
        model, vm = build_model(instance, family, policy, ground)
        lp = solver.solve(relax(model))
        if lp.status != OPTIMAL:
            raise SolverError(f"LP relaxation {lp.status}")
        row.lp_objective = lp.objective
        row.max_frac = max_fractionality(lp, model)
        row.lp_integral = row.max_frac <= int_tol
        res = lp
        if not row.lp_integral:
            ms = mip_solver or solver
            if not ms.supports_mip:
                raise SolverError("LP relaxation is fractional and the solver cannot solve MIPs")
            res = ms.solve(model)
            if res.status != OPTIMAL:
                raise SolverError(f"MIP {res.status}")
        row.mip_objective = res.objective
        row.objective = res.objective
        plans = decode_solution(vm, res, instance, int_tol)
        row.plans = plans
        problems = verify_feasibility(plans, instance)
        if problems:
            raise SolverError(f"decoded plans infeasible: {problems[0]}")
        ok, why = check_nonanticipativity(plans, instance.scenarios, policy)
        if not ok:
            raise SolverError(f"decoded plans anticipate: {why}")
        bd = breakdown(plans, instance)
        row.ground = [b.ground for b in bd]
        row.air = [b.air for b in bd]
        row.route_cost = [b.route_cost for b in bd]
        row.expected_cost = expected([b.cost for b in bd], instance.scenarios.probabilities)
        if plans.aggregate_air is None:
            row.eval_cost = evaluate_policy(instance, plans_to_policy(plans)).expected
        else:
            row.eval_cost = row.expected_cost
        row.accounting_gap = abs(row.eval_cost - row.objective)
    except Exception as e:  # recorded per row, the comparison goes on
        row.error = f"{type(e).__name__}: {e}"
    row.wall_ms = (time.perf_counter() - start) * 1e3
    return row


@dataclass(frozen=True)
class PIBound:
    expected: float
    scenario_costs: tuple[float, ...]
    rows: tuple[VariantRow, ...]


def perfect_information_bound(instance: Instance, solver, family: str = LAGRANGIAN, int_tol: float = INT_TOL,
                              ground: str = GROUND_CG, mip_solver=None) -> PIBound:
    """Probability-weighted optimum of the per-scenario deterministic models."""
    rows, costs = [], []
    for q in range(instance.n_scenarios):
        r = solve_variant(project_scenario(instance, q), family, TWO_STAGE, solver, int_tol, ground, mip_solver)
        if r.error:
            raise SolverError(f"scenario {q}: {r.error}")
        rows.append(r)
        costs.append(r.expected_cost)
    return PIBound(expected(costs, instance.scenarios.probabilities), tuple(costs), tuple(rows))


def _pi_row(instance, family, solver, int_tol, ground, mip_solver) -> VariantRow:
    row = VariantRow(f"{family}/{PI}", family, PI)
    start = time.perf_counter()
    try:
        b = perfect_information_bound(instance, solver, family, int_tol, ground, mip_solver)
        row.expected_cost = b.expected
        row.objective = b.expected
        row.ground = [r.ground[0] for r in b.rows]
        row.air = [r.air[0] for r in b.rows]
        row.route_cost = [r.route_cost[0] for r in b.rows]
        row.max_frac = max(r.max_frac for r in b.rows)
        row.eval_cost = expected([r.eval_cost for r in b.rows], instance.scenarios.probabilities)
        row.accounting_gap = max(r.accounting_gap for r in b.rows)
        row.lp_integral = all(r.lp_integral for r in b.rows)
    except Exception as e:
        row.error = f"{type(e).__name__}: {e}"
    row.wall_ms = (time.perf_counter() - start) * 1e3
    return row


@dataclass
class ComparisonReport:
    n_scenarios: int
    probabilities: tuple[float, ...]
    rows: list[VariantRow]

    def row(self, family: str, policy: str) -> VariantRow:
        for r in self.rows:
            if r.family == family and r.policy == policy:
                return r
        raise KeyError((family, policy))

    def to_csv(self) -> str:
        return report_csv(self)

    def to_text(self) -> str:
        return report_text(self)


def _run_task(args) -> VariantRow:
    instance, fam, pol, solver, int_tol, ground, mip_solver = args
    if pol == PI:
        return _pi_row(instance, fam, solver, int_tol, ground, mip_solver)
    return solve_variant(instance, fam, pol, solver, int_tol, ground, mip_solver)


def compare_models(instance: Instance, solver, families=FAMILIES, policies=POLICIES, jobs: int = 1,
                   int_tol: float = INT_TOL, ground: str = GROUND_CG, include_pi: bool = True,
                   mip_solver=None) -> ComparisonReport:
    """Solve every requested variant plus a perfect-information row per family."""
    tasks = []
    for fam in families:
        if include_pi:
            tasks.append((fam, PI))
        for pol in policies:
            tasks.append((fam, pol))

    args = [(instance, fam, pol, solver, int_tol, ground, mip_solver) for fam, pol in tasks]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_run_task, args))
    else:
        rows = [_run_task(a) for a in args]
    order = {PI: 0, DYNAMIC: 1, SEMI_DYNAMIC: 2, TWO_STAGE: 3}
    rows.sort(key=lambda r: (FAMILIES.index(r.family) if r.family in FAMILIES else 9, order.get(r.policy, 9)))
    return ComparisonReport(instance.n_scenarios, instance.scenarios.probabilities, rows)


def csv_header(n_scenarios: int) -> list[str]:
    cols = ["variant", "family", "policy", "expected_cost"]
    cols += [f"ground_q{k}" for k in range(n_scenarios)]
    cols += [f"air_q{k}" for k in range(n_scenarios)]
    cols += [f"route_cost_q{k}" for k in range(n_scenarios)]
    return cols + ["lp_integral", "max_frac", "wall_ms", "error"]


def _num(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def report_csv(report: ComparisonReport, wall: bool = True) -> str:
    """CSV text; ``wall=False`` blanks the timing column for byte-stable output."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    Q = report.n_scenarios
    w.writerow(csv_header(Q))
    for r in report.rows:
        def per(vals):
            return [_num(v) for v in vals] if vals else [""] * Q
        w.writerow([r.variant, r.family, r.policy, _num(r.expected_cost)]
                   + per(r.ground) + per(r.air) + per(r.route_cost)
                   + ["" if r.lp_integral is None else str(bool(r.lp_integral)).lower(),
                      _num(r.max_frac), f"{r.wall_ms:.1f}" if wall else "", r.error])
    return buf.getvalue()


def read_report_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


def report_text(report: ComparisonReport) -> str:
    Q = report.n_scenarios
    head = ["variant", "expected"] + [f"ground q{k}" for k in range(Q)] + [f"air q{k}" for k in range(Q)] \
        + [f"route q{k}" for k in range(Q)] + ["LP integral", "max frac", "ms"]
    lines = [head]
    for r in report.rows:
        if r.error:
            lines.append([r.variant, "error: " + r.error])
            continue
        lines.append([r.variant, f"{r.expected_cost:.2f}"]
                     + [str(g) for g in r.ground] + [f"{a:g}" for a in r.air]
                     + [f"{c:g}" for c in r.route_cost]
                     + ["yes" if r.lp_integral else "no", f"{r.max_frac:.2g}", f"{r.wall_ms:.0f}"])
    widths = [max(len(l[c]) for l in lines if c < len(l)) for c in range(len(head))]
    out = []
    for l in lines:
        if len(l) == 2 and l[1].startswith("error"):
            out.append(f"{l[0]:<{widths[0]}}  {l[1]}")
        else:
            out.append("  ".join(v.rjust(widths[c]) if c else v.ljust(widths[c]) for c, v in enumerate(l)))
    units = "costs in cost units; delays in periods"
    return "\n".join(out) + "\n" + units + "\n"
