"""Run configuration: built-in defaults, optionally overridden by a JSON file.

Command-line flags override both.  Keys::

    int_tol             integrality tolerance for LP-relaxation checks (1e-6)
    feas_tol            reference simplex feasibility tolerance (1e-7)
    opt_tol             reference simplex reduced-cost tolerance (1e-9)
    ground_coefficient  "cg" or "cg-ca": ground-delay rate in the two-stage
                        Lagrangian-Eulerian objective
    solver              "highs", "reference" or "external"
    external_command    template with {in} and {out}; falls back to $CTOP_SOLVER
    time_limit          seconds per solve for in-process HiGHS (null = none)
    jobs                worker processes for compare / check-integrality
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .modelgen.eulerian import GROUND_CG, GROUND_CG_MINUS_CA


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    int_tol: float = 1e-6
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    ground_coefficient: str = GROUND_CG
    solver: str = "highs"
    external_command: str | None = None
    time_limit: float | None = None
    jobs: int = 1

    def with_overrides(self, **kw) -> "Config":
        return dataclasses.replace(self, **{k: v for k, v in kw.items() if v is not None})


def load_config(path=None) -> Config:
    if path is None:
        return Config()
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in dataclasses.fields(Config)}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    cfg = Config(**doc)
    if cfg.ground_coefficient not in (GROUND_CG, GROUND_CG_MINUS_CA):
        raise ConfigError(f"ground_coefficient must be {GROUND_CG!r} or {GROUND_CG_MINUS_CA!r}")
    if cfg.solver not in ("highs", "reference", "external"):
        raise ConfigError(f"unknown solver {cfg.solver!r}")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be >= 1")
    return cfg
