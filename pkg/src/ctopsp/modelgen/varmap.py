from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

TWO_STAGE = "two-stage"
SEMI_DYNAMIC = "semi-dynamic"
DYNAMIC = "dynamic"
POLICIES = (TWO_STAGE, SEMI_DYNAMIC, DYNAMIC)

LAGRANGIAN = "lagrangian"
EULERIAN = "eulerian"  # the Lagrangian-Eulerian family
FAMILIES = (LAGRANGIAN, EULERIAN)

# variable kinds
W = "w"            # passed/departed resource by period t
W_ARR = "wt"       # reached the first PCA by period t (arrival, not admission)
DELTA = "d"        # route choice, two-stage
DELTA_T = "dt"     # departs in period t on route j, per scenario
DELTA_Q = "dq"     # route choice per scenario
P = "P"            # direct demand on a path
L = "L"            # flights crossing a PCA of a path
A = "A"            # flights air-holding before a PCA of a path
FLIGHT_KINDS = (W, W_ARR, DELTA, DELTA_T, DELTA_Q)


class VarKey(NamedTuple):
    kind: str
    flight: int | None = None
    route: int | None = None
    resource: str | None = None
    period: int | None = None
    scenario: int | None = None
    path: int | None = None


@dataclass
class VarMap:
    """Two-way map between model columns and indexed variables."""

    family: str
    policy: str
    n_scenarios: int
    keys: list[VarKey] = field(default_factory=list)
    index: dict[VarKey, int] = field(default_factory=dict)
    windows: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)
    path_of: dict = field(default_factory=dict)

    def add(self, key: VarKey) -> int:
        if key in self.index:
            raise KeyError(f"duplicate variable key {key}")
        self.index[key] = len(self.keys)
        self.keys.append(key)
        return self.index[key]

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, key: VarKey) -> int:
        return self.index[key]

    def get(self, key: VarKey, default=None):
        return self.index.get(key, default)

    def key(self, col: int) -> VarKey:
        return self.keys[col]

    @property
    def airport_shared(self) -> bool:
        """Two-stage models keep one copy of the departure variables."""
        return self.policy == TWO_STAGE

    def flight_columns(self) -> list[int]:
        return [c for c, k in enumerate(self.keys) if k.kind in FLIGHT_KINDS]
