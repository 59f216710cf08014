import json

import pytest

from ctopsp.analysis import read_report_csv
from ctopsp.cli import run
from ctopsp.config import Config, ConfigError, load_config


@pytest.fixture()
def t1_file(tmp_path):
    p = tmp_path / "t1.json"
    assert run(["gen", "tiny", "--out", str(p)]) == 0
    return p


def test_validate(t1_file, capsys):
    assert run(["validate", str(t1_file)]) == 0
    assert json.loads(capsys.readouterr().out)["valid"]


def test_validate_bad(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"horizon": 3}')
    assert run(["validate", str(p)]) == 1
    assert run(["validate", str(tmp_path / "missing.json")]) == 1


def test_usage_errors(t1_file):
    assert run(["frobnicate"]) == 64
    assert run(["validate", str(t1_file), "--bogus"]) == 64
    assert run(["build", str(t1_file), "--family", "lagrangian"]) == 64


def test_build_and_determinism(t1_file, tmp_path):
    a, b = tmp_path / "a.lp", tmp_path / "b.lp"
    for out in (a, b):
        assert run(["build", str(t1_file), "--family", "lagrangian", "--policy", "dynamic", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    m = tmp_path / "m.mps"
    assert run(["build", str(t1_file), "--family", "eulerian", "--policy", "two-stage",
                "--format", "mps", "--out", str(m)]) == 0
    assert m.read_text().startswith("NAME")


def test_solve(t1_file, capsys):
    assert run(["solve", str(t1_file), "--family", "lagrangian", "--policy", "dynamic"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["objective"] == pytest.approx(2.5)
    assert run(["solve", str(t1_file), "--family", "lagrangian", "--policy", "dynamic", "--relax",
                "--solver", "reference"]) == 0
    assert json.loads(capsys.readouterr().out)["objective"] == pytest.approx(2.5)


def test_solver_failure_exit_2(t1_file, monkeypatch):
    monkeypatch.delenv("CTOP_SOLVER", raising=False)
    assert run(["solve", str(t1_file), "--family", "lagrangian", "--policy", "dynamic",
                "--external", "/no/such/solver {in} {out}"]) == 2
    assert run(["solve", str(t1_file), "--family", "lagrangian", "--policy", "dynamic",
                "--solver", "external"]) == 2


def test_env_default_external(t1_file, cbc_command, monkeypatch, capsys):
    monkeypatch.setenv("CTOP_SOLVER", cbc_command)
    assert run(["solve", str(t1_file), "--family", "eulerian", "--policy", "dynamic",
                "--solver", "external"]) == 0
    assert json.loads(capsys.readouterr().out)["objective"] == pytest.approx(2.5)


def test_compare_csv(t1_file, tmp_path):
    out = tmp_path / "r.csv"
    assert run(["compare", str(t1_file), "--out", str(out), "--no-timing"]) == 0
    rows = read_report_csv(out.read_text())
    for fam in ("lagrangian", "eulerian"):
        c = {r["policy"]: float(r["expected_cost"]) for r in rows if r["family"] == fam}
        assert c["perfect-information"] <= c["dynamic"] <= c["semi-dynamic"] <= c["two-stage"]
    again = tmp_path / "r2.csv"
    run(["compare", str(t1_file), "--out", str(again), "--no-timing"])
    assert out.read_bytes() == again.read_bytes()


def test_oracle(t1_file, capsys):
    assert run(["oracle", str(t1_file), "--policy", "dynamic"]) == 0
    assert json.loads(capsys.readouterr().out)["cost"] == pytest.approx(2.5)


def test_oracle_budget_exit_3(tmp_path, capsys):
    big = tmp_path / "big.json"
    assert run(["gen", "synth", "--flights", "60", "--periods", "12", "--out", str(big)]) == 0
    assert run(["oracle", str(big), "--policy", "dynamic"]) == 3
    assert "budget" in capsys.readouterr().err


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["gen", "synth", "--seed", "5", "--flights", "6", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_check_integrality_seeds(tmp_path, capsys):
    p = tmp_path / "s.json"
    run(["gen", "synth", "--seed", "2", "--flights", "5", "--no-tos", "--out", str(p)])
    capsys.readouterr()
    assert run(["check-integrality", str(p), "--seeds", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("seed,variant")
    assert len(lines) == 1 + 2 * 6
    assert {ln.split(",")[0] for ln in lines[1:]} == {"2", "3"}


def test_check_integrality_needs_generator(t1_file):
    assert run(["check-integrality", str(t1_file), "--seeds", "2"]) == 1


def test_config_file(t1_file, tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"solver": "reference", "int_tol": 1e-5}))
    assert run(["--config", str(cfg), "solve", str(t1_file), "--family", "lagrangian",
                "--policy", "two-stage"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["solver"] == "reference" and out["relaxed"]
    # the flag wins over the file
    assert run(["--config", str(cfg), "solve", str(t1_file), "--family", "lagrangian",
                "--policy", "two-stage", "--solver", "highs"]) == 0
    assert json.loads(capsys.readouterr().out)["solver"] == "highs"


def test_bad_config(t1_file, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"tolerance": 1}')
    assert run(["--config", str(cfg), "validate", str(t1_file)]) == 1
    with pytest.raises(ConfigError):
        load_config(cfg)
    cfg.write_text('{"ground_coefficient": "ca"}')
    with pytest.raises(ConfigError):
        load_config(cfg)
    assert load_config(None) == Config()
