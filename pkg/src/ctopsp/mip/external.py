"""Run an MPS-reading solver as a subprocess and read back its solution file.

The command is a template with ``{in}`` (MPS path we write) and ``{out}``
(solution path the solver writes), e.g.::

    cbc {in} -printingOptions all -solve -solu {out}

Solution files are read line by line.  Accepted value lines are
``name value`` or CBC's ``index name value [reduced-cost]`` (optionally
prefixed by ``**``).  A first line that is not a value line is taken as a
status header such as ``Optimal - objective value 3.0``.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import tempfile
import time
from pathlib import Path

import numpy as np

from .model import MipModel
from .result import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, SolveResult, SolverError
from .writers import write_model

ENV_VAR = "CTOP_SOLVER"


class SolutionFormatError(SolverError):
    pass


def _status_from_header(line: str) -> str:
    s = line.lower()
    if "infeasible" in s:
        return INFEASIBLE
    if "unbounded" in s:
        return UNBOUNDED
    if "optimal" in s:
        return OPTIMAL
    if "stopped" in s or "limit" in s:
        return ITERATION_LIMIT
    raise SolutionFormatError(f"unrecognized solution header: {line.strip()!r}")


def _value_line(tokens: list[str]) -> tuple[str, float] | None:
    if tokens and tokens[0] == "**":
        tokens = tokens[1:]
    try:
        if len(tokens) == 2:
            return tokens[0], float(tokens[1])
        if len(tokens) in (3, 4) and tokens[0].lstrip("-").isdigit():
            return tokens[1], float(tokens[2])
    except ValueError:
        return None
    return None


def parse_solution(text: str) -> tuple[str, float | None, dict[str, float]]:
    """Return (status, header objective or None, name -> value)."""
    status, objective = OPTIMAL, None
    values: dict[str, float] = {}
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    for n, line in enumerate(lines):
        parsed = _value_line(line.split())
        if parsed is None:
            if n == 0:
                status = _status_from_header(line)
                if "objective value" in line.lower():
                    try:
                        objective = float(line.lower().split("objective value")[1].split()[0])
                    except (IndexError, ValueError):
                        objective = None
                continue
            raise SolutionFormatError(f"line {n + 1}: cannot parse {line.strip()!r}")
        values[parsed[0]] = parsed[1]
    return status, objective, values


def _render(command: str, inp: Path, out: Path) -> list[str]:
    if "{in}" not in command or "{out}" not in command:
        raise ValueError("solver command must contain {in} and {out} placeholders")
    return [part.replace("{in}", str(inp)).replace("{out}", str(out)) for part in shlex.split(command)]


def solve_external(
    model: MipModel,
    command: str | None = None,
    workdir=None,
    solver_id: str | None = None,
    timeout: float | None = None,
) -> SolveResult:
    """Write ``model`` as MPS, run ``command``, parse the solution it writes."""
    command = command or os.environ.get(ENV_VAR)
    if not command:
        raise SolverError(f"no external solver command given and {ENV_VAR} is not set")
    solver_id = solver_id or Path(shlex.split(command)[0]).name
    start = time.perf_counter()
    with tempfile.TemporaryDirectory(dir=workdir, prefix="ctopsp-") as tmp:
        inp = Path(tmp) / "model.mps"
        out = Path(tmp) / "model.sol"
        inp.write_text(write_model(model, "mps"))
        argv = _render(command, inp, out)
        try:
            proc = subprocess.run(argv, cwd=tmp, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise SolverError(f"solver not found: {argv[0]}") from None
        except subprocess.TimeoutExpired:
            raise SolverError(f"solver timed out after {timeout}s") from None
        if proc.returncode == 127:
            raise SolverError(f"solver not found: {argv[0]}\n{proc.stderr.strip()}")
        if proc.returncode != 0:
            raise SolverError(
                f"solver exited with status {proc.returncode}\n{proc.stdout[-2000:]}{proc.stderr[-2000:]}"
            )
        if not out.exists():
            raise SolutionFormatError(f"solver wrote no solution file\n{proc.stdout[-2000:]}")
        status, header_obj, values = parse_solution(out.read_text())
    x = np.full(model.n_vars, np.nan)
    if status == OPTIMAL:
        missing = [n for n in model.var_names if n not in values]
        if missing:
            raise SolutionFormatError(
                f"solution file lacks {len(missing)} variable value(s), first: {missing[0]}"
            )
        x = np.array([values[n] for n in model.var_names], dtype=float)
    obj = model.objective(x) if status == OPTIMAL else np.nan
    return SolveResult(status, obj, x, solver_id, 0, (time.perf_counter() - start) * 1e3,
                       {"header_objective": header_obj})
