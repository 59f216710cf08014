import math

import pytest

from ctopsp.analysis import (
    PI,
    DecodeError,
    check_nonanticipativity,
    compare_models,
    decode_solution,
    perfect_information_bound,
    read_report_csv,
    report_csv,
    solve_variant,
    verify_feasibility,
)
from ctopsp.mip import HighsSolver, ReferenceSolver, relax, solve_highs
from ctopsp.modelgen import DYNAMIC, EULERIAN, LAGRANGIAN, POLICIES, TWO_STAGE, build_model


@pytest.fixture(scope="module")
def t1_report(t1):
    return compare_models(t1, HighsSolver())


def test_report_rows_and_order(t1_report):
    assert [r.variant for r in t1_report.rows] == [
        "lagrangian/perfect-information", "lagrangian/dynamic", "lagrangian/semi-dynamic",
        "lagrangian/two-stage", "eulerian/perfect-information", "eulerian/dynamic",
        "eulerian/semi-dynamic", "eulerian/two-stage"]
    assert all(not r.error for r in t1_report.rows)


def test_t1_pi_and_breakdown(t1_report):
    pi = t1_report.row(LAGRANGIAN, PI)
    assert pi.expected_cost == pytest.approx(2.0)
    dyn = t1_report.row(LAGRANGIAN, DYNAMIC)
    assert sum(dyn.ground) + 2 * sum(dyn.air) == pytest.approx(2 * dyn.expected_cost)


def test_csv_schema(t1_report):
    text = report_csv(t1_report, wall=False)
    rows = read_report_csv(text)
    assert list(rows[0]) == ["variant", "family", "policy", "expected_cost", "ground_q0", "ground_q1",
                             "air_q0", "air_q1", "route_cost_q0", "route_cost_q1", "lp_integral",
                             "max_frac", "wall_ms", "error"]
    assert all(r["wall_ms"] == "" for r in rows)
    assert report_csv(t1_report, wall=False) == text


def test_decode_and_verify(t1):
    m, vm = build_model(t1, LAGRANGIAN, DYNAMIC)
    plans = decode_solution(vm, solve_highs(m), t1)
    assert verify_feasibility(plans, t1) == []
    ok, why = check_nonanticipativity(plans, t1.scenarios, DYNAMIC)
    assert ok, why
    # the dynamic plan splits after the branch point, so it is not two-stage
    assert not check_nonanticipativity(plans, t1.scenarios, TWO_STAGE)[0]


def test_decode_rejects_fractional(t1):
    m, vm = build_model(t1, LAGRANGIAN, DYNAMIC)
    res = solve_highs(relax(m))
    res.x = res.x * 0 + 0.5
    with pytest.raises(DecodeError):
        decode_solution(vm, res, t1)


def test_eulerian_decode_has_aggregate_air(t1):
    m, vm = build_model(t1, EULERIAN, DYNAMIC)
    plans = decode_solution(vm, solve_highs(m), t1)
    assert plans.aggregate_air is not None
    assert all(p.air is None for per_q in plans.plans for p in per_q)


def test_lp_only_solver_falls_over_cleanly_when_fractional(t1):
    row = solve_variant(t1, LAGRANGIAN, TWO_STAGE, ReferenceSolver())
    assert not row.error and row.lp_integral
    assert row.expected_cost == pytest.approx(3.0)


def test_accounting_gap_small(t1_report):
    for r in t1_report.rows:
        assert r.accounting_gap <= 1e-6


def test_pi_bound(t1):
    b = perfect_information_bound(t1, HighsSolver())
    assert b.scenario_costs == pytest.approx((1.0, 3.0))


def test_jobs_give_same_rows(t1, t1_report):
    par = compare_models(t1, HighsSolver(), jobs=2)
    assert report_csv(par, wall=False) == report_csv(t1_report, wall=False)


def test_error_recorded_not_raised(t1):
    from ctopsp.mip import ExternalSolver
    row = solve_variant(t1, LAGRANGIAN, DYNAMIC, ExternalSolver("/no/such/solver {in} {out}"))
    assert "SolverError" in row.error and math.isnan(row.expected_cost)
