"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 solver failure,
3 oracle budget refusal, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import Config, ConfigError, load_config
from .instance import InstanceError, dump_instance, read_instance
from .mip import ENV_VAR, ExternalSolver, HighsSolver, ReferenceSolver, SolverError, max_fractionality, relax, write_model
from .mip.result import OPTIMAL
from .modelgen import FAMILIES, POLICIES, build_model, model_stats

EXIT_OK, EXIT_INVALID, EXIT_SOLVER, EXIT_BUDGET, EXIT_USAGE = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True))


def _solver(cfg: Config, external: str | None, name: str | None = None):
    name = "external" if external else (name or cfg.solver)
    if name == "external":
        return ExternalSolver(external or cfg.external_command, timeout=cfg.time_limit)
    if name == "reference":
        return ReferenceSolver(cfg.feas_tol, cfg.opt_tol)
    return HighsSolver(cfg.time_limit)


def _load(path):
    return read_instance(path)


# --- subcommands ---------------------------------------------------------

def cmd_gen(a, cfg) -> int:
    from .gen import SynthParams, build_case_study, strip_tos, synth_instance, tiny_instance
    if a.kind == "synth":
        inst = synth_instance(SynthParams(
            airports=a.airports, pcas=a.pcas, flights=a.flights if a.flights is not None else 3,
            tos_mean=a.tos_mean, periods=a.periods,
            scenarios=a.scenarios, branch_points=a.branch_points, tightness=a.tightness, seed=a.seed,
            ground=a.ground, air=a.air, max_options=a.max_options,
        ))
    elif a.kind == "case-study":
        inst = build_case_study(a.seed, n_flights=a.flights or 890)
    else:
        inst = tiny_instance()
    if a.no_tos:
        inst = strip_tos(inst)
    text = dump_instance(inst)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_validate(a, cfg) -> int:
    inst = _load(a.instance)
    _emit({"valid": True, "flights": len(inst.flights), "options": inst.n_options,
           "scenarios": inst.n_scenarios, "horizon": inst.horizon})
    return EXIT_OK


def cmd_build(a, cfg) -> int:
    inst = _load(a.instance)
    model, _ = build_model(inst, a.family, a.policy, cfg.ground_coefficient)
    if a.relax:
        model = relax(model)
    text = write_model(model, a.format)
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    v, r, nz = model_stats(model)
    print(json.dumps({"variables": v, "constraints": r, "nonzeros": nz}), file=sys.stderr)
    return EXIT_OK


def cmd_solve(a, cfg) -> int:
    inst = _load(a.instance)
    model, vm = build_model(inst, a.family, a.policy, cfg.ground_coefficient)
    solver = _solver(cfg, a.external, a.solver)
    target = relax(model) if a.relax else model
    if target.is_mip and not solver.supports_mip:
        target = relax(model)
    res = solver.solve(target)
    out = {"family": a.family, "policy": a.policy, "status": res.status, "objective": res.objective,
           "solver": res.solver_id, "relaxed": not target.is_mip}
    if res.status == OPTIMAL:
        out["max_frac"] = max_fractionality(res, model)
        out["lp_integral"] = out["max_frac"] <= cfg.int_tol
    _emit(out)
    return EXIT_OK if res.status == OPTIMAL else EXIT_SOLVER


def cmd_compare(a, cfg) -> int:
    from .analysis import compare_models, report_csv
    inst = _load(a.instance)
    solver = _solver(cfg, a.external, a.solver)
    fams = a.family or list(FAMILIES)
    pols = a.policy or list(POLICIES)
    rep = compare_models(inst, solver, fams, pols, jobs=cfg.jobs, int_tol=cfg.int_tol,
                         ground=cfg.ground_coefficient)
    text = report_csv(rep, wall=not a.no_timing)
    if a.out:
        Path(a.out).write_text(text)
        sys.stdout.write(rep.to_text())
    else:
        sys.stdout.write(text)
    return EXIT_SOLVER if any(r.error for r in rep.rows) else EXIT_OK


def _regenerate(inst, seed):
    from .gen import SynthParams, build_case_study, strip_tos, synth_instance
    meta = inst.meta
    if meta.get("generator") == "synth":
        params = dict(meta["params"])
        params["seed"] = seed
        out = synth_instance(SynthParams(**params))
    elif meta.get("generator") == "case-study":
        out = build_case_study(seed, n_flights=len(inst.flights))
    else:
        raise InstanceError("--seeds needs an instance written by `ctopsp gen synth` or `gen case-study`")
    return strip_tos(out) if meta.get("tos") == "stripped" else out


def cmd_check_integrality(a, cfg) -> int:
    """LP relaxation of every variant; one CSV line per (instance, variant)."""
    import csv
    import io
    from concurrent.futures import ProcessPoolExecutor
    base = _load(a.instance)
    if a.seeds:
        start = int(base.meta.get("seed", base.meta.get("demand_seed", 0)))
        insts = [(start + k, _regenerate(base, start + k)) for k in range(a.seeds)]
    else:
        insts = [(base.meta.get("seed", base.meta.get("demand_seed", "")), base)]
    solver = _solver(cfg, a.external, a.solver)
    tasks = [(inst, fam, pol, solver, cfg) for _, inst in insts for fam in FAMILIES for pol in POLICIES]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            results = list(ex.map(_integrality_task, tasks))
    else:
        results = [_integrality_task(t) for t in tasks]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "variant", "status", "lp_objective", "max_frac", "lp_integral"])
    n_int = n = 0
    failed = False
    for (seed, _), chunk in zip(insts, [results[k:k + 6] for k in range(0, len(results), 6)]):
        for r in chunk:
            n += 1
            n_int += bool(r["lp_integral"])
            failed |= r["status"] != OPTIMAL
            w.writerow([seed, r["variant"], r["status"], f"{r['objective']:.10g}",
                        f"{r['max_frac']:.3g}", str(r["lp_integral"]).lower()])
    text = buf.getvalue()
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"integral LP relaxations: {n_int}/{n}", file=sys.stderr)
    return EXIT_SOLVER if failed else EXIT_OK


def _integrality_task(args):
    inst, fam, pol, solver, cfg = args
    model, _ = build_model(inst, fam, pol, cfg.ground_coefficient)
    res = solver.solve(relax(model))
    mf = max_fractionality(res, model) if res.status == OPTIMAL else float("nan")
    return {"variant": f"{fam}/{pol}", "status": res.status, "objective": res.objective,
            "max_frac": mf, "lp_integral": res.status == OPTIMAL and mf <= cfg.int_tol}


def cmd_oracle(a, cfg) -> int:
    from .oracle import enumerate_policies, within_soft_limits
    inst = _load(a.instance)
    soft = within_soft_limits(inst)
    res = enumerate_policies(inst, a.policy)
    out = {"policy": a.policy, "cost": res.cost, "scenario_costs": list(res.scenario_costs),
           "candidates": res.n_candidates, "soft_limit_notes": soft}
    if res.policy is not None:
        out["decisions"] = [
            [{"route": d.route, "departure": d.departure, "admissions": list(d.admissions)} for d in per_q]
            for per_q in res.policy.decisions
        ]
    _emit(out)
    return EXIT_OK


# --- parser --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctopsp", description="Stochastic CTOP models: generate, build, solve, compare.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="JSON config file (tolerances, solver, ground coefficient)")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a generated instance")
    g.add_argument("kind", choices=["synth", "case-study", "tiny"])
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--airports", type=int, default=2)
    g.add_argument("--pcas", type=int, default=2)
    g.add_argument("--flights", type=int, default=None)
    g.add_argument("--tos-mean", type=float, default=1.5)
    g.add_argument("--periods", type=int, default=10)
    g.add_argument("--scenarios", type=int, default=2)
    g.add_argument("--branch-points", type=int, default=1)
    g.add_argument("--tightness", type=float, default=0.5)
    g.add_argument("--ground", type=int, default=16)
    g.add_argument("--air", type=int, default=4)
    g.add_argument("--max-options", type=int, default=4)
    g.add_argument("--no-tos", action="store_true", help="keep only each flight's original route")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("validate", help="parse and validate an instance")
    v.add_argument("instance")
    v.set_defaults(func=cmd_validate)

    def model_args(sp, required=True):
        sp.add_argument("instance")
        sp.add_argument("--family", choices=FAMILIES, required=required)
        sp.add_argument("--policy", choices=POLICIES, required=required)

    b = sub.add_parser("build", help="write a model file")
    model_args(b)
    b.add_argument("--format", choices=["lp", "mps"], default="lp")
    b.add_argument("--relax", action="store_true")
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    def solver_args(sp):
        sp.add_argument("--solver", choices=["highs", "reference", "external"])
        sp.add_argument("--external", metavar="CMD", help=f"solver command template (default ${ENV_VAR})")
        sp.add_argument("--jobs", type=int)

    s = sub.add_parser("solve", help="solve one model")
    model_args(s)
    s.add_argument("--relax", action="store_true")
    solver_args(s)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="solve all variants and write the comparison CSV")
    c.add_argument("instance")
    c.add_argument("--family", choices=FAMILIES, action="append")
    c.add_argument("--policy", choices=POLICIES, action="append")
    c.add_argument("--out")
    c.add_argument("--no-timing", action="store_true", help="blank the wall_ms column")
    solver_args(c)
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("check-integrality", help="LP-relaxation integrality of all six models")
    k.add_argument("instance")
    k.add_argument("--seeds", type=int, default=0,
                   help="regenerate the instance from its recorded generator with N consecutive seeds")
    k.add_argument("--out")
    solver_args(k)
    k.set_defaults(func=cmd_check_integrality)

    o = sub.add_parser("oracle", help="brute-force optimum of a tiny instance")
    o.add_argument("instance")
    o.add_argument("--policy", choices=POLICIES, required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def run(argv=None) -> int:
    from .oracle import BudgetExceeded
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        cfg = load_config(a.config).with_overrides(jobs=getattr(a, "jobs", None))
    except ConfigError as e:
        print(f"ctopsp: {e}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return a.func(a, cfg)
    except (InstanceError, FileNotFoundError, ValueError) as e:
        if isinstance(e, BudgetExceeded):
            raise
        print(f"ctopsp: {e}", file=sys.stderr)
        return EXIT_INVALID
    except BudgetExceeded as e:
        print(f"ctopsp: oracle budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except SolverError as e:
        print(f"ctopsp: solver failure: {e}", file=sys.stderr)
        return EXIT_SOLVER


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
