from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"
STATUSES = (OPTIMAL, INFEASIBLE, UNBOUNDED, ITERATION_LIMIT)


class SolverError(RuntimeError):
    """A solver could not be run or its output could not be read."""


@dataclass
class SolveResult:
    status: str
    objective: float
    x: np.ndarray
    solver_id: str
    iterations: int = 0
    wall_ms: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def max_fractionality(result: SolveResult, model) -> float:
    """Largest distance to the nearest integer over integer-flagged columns."""
    idx = np.flatnonzero(model.integer)
    if not len(idx):
        return 0.0
    v = np.asarray(result.x, dtype=float)[idx]
    return float(np.max(np.abs(v - np.round(v))))
