"""Generic sparse MIP container, file writers and solver backends."""

from __future__ import annotations

from dataclasses import dataclass

from .external import ENV_VAR, parse_solution, solve_external
from .highs import solve_highs
from .model import MipModel, ModelBuilder, from_dense, model_stats, relax
from .result import (
    INFEASIBLE,
    ITERATION_LIMIT,
    OPTIMAL,
    UNBOUNDED,
    SolveResult,
    SolverError,
    max_fractionality,
)
from .simplex import solve_reference
from .writers import FormatError, write_model


@dataclass(frozen=True)
class ReferenceSolver:
    """Own bounded simplex; LP only."""

    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    name: str = "reference"
    supports_mip: bool = False

    def solve(self, model: MipModel) -> SolveResult:
        return solve_reference(model, self.feas_tol, self.opt_tol)


@dataclass(frozen=True)
class HighsSolver:
    time_limit: float | None = None
    name: str = "highs"
    supports_mip: bool = True

    def solve(self, model: MipModel) -> SolveResult:
        return solve_highs(model, self.time_limit)


@dataclass(frozen=True)
class ExternalSolver:
    command: str | None = None
    workdir: str | None = None
    timeout: float | None = None
    name: str = "external"
    supports_mip: bool = True

    def solve(self, model: MipModel) -> SolveResult:
        return solve_external(model, self.command, self.workdir, timeout=self.timeout)


def get_solver(name: str = "highs", command: str | None = None, **kw):
    if command or name == "external":
        return ExternalSolver(command, **kw)
    if name == "highs":
        return HighsSolver(**kw)
    if name == "reference":
        return ReferenceSolver(**kw)
    raise ValueError(f"unknown solver {name!r}")


__all__ = [
    "ENV_VAR", "ExternalSolver", "FormatError", "HighsSolver", "INFEASIBLE", "ITERATION_LIMIT",
    "MipModel", "ModelBuilder", "OPTIMAL", "ReferenceSolver", "SolveResult", "SolverError",
    "UNBOUNDED", "from_dense", "get_solver", "max_fractionality", "model_stats",
    "parse_solution", "relax", "solve_external", "solve_highs", "solve_reference",
    "write_model",
]
