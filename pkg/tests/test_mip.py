import math
import subprocess

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctopsp.mip import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    FormatError,
    ModelBuilder,
    from_dense,
    max_fractionality,
    parse_solution,
    relax,
    solve_external,
    solve_highs,
    solve_reference,
    write_model,
)
from ctopsp.mip.model import NAME_LIMIT, shorten_name
from ctopsp.mip.result import SolverError


def toy():
    return from_dense([1, -2.5], [([1, 1], "L", 4), ([1, -1], "G", -1)], ub=[3, None],
                      integer=[True, False], name="toy")


TOY_LP = """\\ Problem: toy
Minimize
 obj: 1 x0 - 2.5 x1
Subject To
 r0: 1 x0 + 1 x1 <= 4
 r1: 1 x0 - 1 x1 >= -1
Bounds
 0 <= x0 <= 3
Generals
 x0
End
"""


def test_lp_golden():
    assert write_model(toy(), "lp") == TOY_LP


def test_mps_sections_in_order():
    text = write_model(toy(), "mps")
    heads = [ln for ln in text.splitlines() if ln and not ln.startswith(" ")]
    assert heads == ["NAME toy", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]
    assert "    MARKER0 'MARKER' 'INTORG'" in text
    assert "    UP BND x0 3" in text


def test_writer_deterministic(t1):
    from ctopsp.modelgen import build_model
    a = write_model(build_model(t1, "lagrangian", "dynamic")[0], "mps")
    b = write_model(build_model(t1, "lagrangian", "dynamic")[0], "mps")
    assert a == b


def test_bad_format_and_names():
    with pytest.raises(ValueError):
        write_model(toy(), "xml")
    b = ModelBuilder("m")
    b.add_var("has space")
    with pytest.raises(FormatError):
        write_model(b.build(), "mps")


def test_long_names_shortened_uniquely():
    taken = set()
    long = "w" * (NAME_LIMIT + 40)
    a = shorten_name(long + "a", taken)
    b = shorten_name(long + "b", taken)
    assert a != b and len(a) <= NAME_LIMIT and len(b) <= NAME_LIMIT


def test_nan_bound_rejected():
    with pytest.raises(ValueError):
        ModelBuilder().add_var("x", 0.0, float("nan"))


def test_toy_solvers():
    m = toy()
    assert solve_highs(m).objective == pytest.approx(-4.0)
    r = solve_reference(relax(m))
    assert r.status == OPTIMAL and r.objective == pytest.approx(-4.75)
    assert max_fractionality(r, m) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        solve_reference(m)


def test_infeasible_and_unbounded():
    inf = from_dense([1], [([1], "G", 2)], ub=[1])
    assert solve_reference(inf).status == INFEASIBLE
    assert solve_highs(inf).status == INFEASIBLE
    unb = from_dense([-1], [([1], "G", 0)])
    assert solve_reference(unb).status == UNBOUNDED


def test_degenerate_cycling_example():
    # Beale's example cycles under the textbook rule
    c = [-0.75, 150, -0.02, 6]
    rows = [([0.25, -60, -0.04, 9], "L", 0), ([0.5, -90, -0.02, 3], "L", 0), ([0, 0, 1, 0], "L", 1)]
    r = solve_reference(from_dense(c, rows))
    assert r.status == OPTIMAL and r.objective == pytest.approx(-0.05)


@st.composite
def random_lp(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 5))
    num = st.integers(-4, 4)
    c = [draw(num) for _ in range(n)]
    rows = []
    for _ in range(m):
        rows.append(([draw(num) for _ in range(n)], draw(st.sampled_from("LEG")), draw(st.integers(-5, 8))))
    ub = [draw(st.sampled_from([1, 3, math.inf])) for _ in range(n)]
    return from_dense(c, rows, ub=ub)


@settings(max_examples=150, deadline=None)
@given(random_lp())
def test_reference_matches_highs(model):
    a = solve_reference(model)
    b = solve_highs(model)
    if b.status == OPTIMAL:
        assert a.status == OPTIMAL
        assert a.objective == pytest.approx(b.objective, abs=1e-6)
        assert model.violation(a.x) <= 1e-6
    elif b.status == INFEASIBLE:
        assert a.status == INFEASIBLE


@settings(max_examples=60, deadline=None)
@given(random_lp(), st.lists(st.booleans(), min_size=5, max_size=5))
def test_relaxation_is_lower_bound(model, flags):
    import dataclasses
    mip = dataclasses.replace(model, integer=np.array(flags[:model.n_vars]))
    a, b = solve_highs(relax(mip)), solve_highs(mip)
    if a.status == OPTIMAL and b.status == OPTIMAL:
        assert a.objective <= b.objective + 1e-6


# --- external solver ---------------------------------------------------------

def test_parse_plain_and_cbc():
    st_, obj, vals = parse_solution("x0 1\nx1 2.5\n")
    assert st_ == OPTIMAL and obj is None and vals == {"x0": 1, "x1": 2.5}
    cbc = "Optimal - objective value -4.00000000\n      0 x0        1       0\n      1 x1        2.5    0\n"
    st_, obj, vals = parse_solution(cbc)
    assert st_ == OPTIMAL and obj == -4.0 and vals["x1"] == 2.5
    assert parse_solution("Infeasible - objective value 0\n")[0] == INFEASIBLE


def test_parse_garbage():
    with pytest.raises(SolverError):
        parse_solution("x0 1\nthis is not a value line\n")


def test_external_missing_binary():
    with pytest.raises(SolverError):
        solve_external(toy(), "/nonexistent/solver {in} {out}")


def test_external_needs_placeholders():
    with pytest.raises(ValueError):
        solve_external(toy(), "cbc model.mps")


def test_external_fake_solver(tmp_path):
    script = tmp_path / "fake.py"
    script.write_text("import sys\nopen(sys.argv[2], 'w').write('Optimal - objective value -4\\nx0 2\\nx1 2\\n')\n")
    r = solve_external(toy(), f"python3 {script} {{in}} {{out}}")
    assert r.status == OPTIMAL and r.objective == pytest.approx(-3.0)


def test_cbc_round_trip(cbc_command, t1):
    from ctopsp.modelgen import build_model
    assert solve_external(toy(), cbc_command).objective == pytest.approx(-4.0)
    for fam in ("lagrangian", "eulerian"):
        m, _ = build_model(t1, fam, "dynamic")
        assert solve_external(m, cbc_command).objective == pytest.approx(solve_highs(m).objective, abs=1e-6)
