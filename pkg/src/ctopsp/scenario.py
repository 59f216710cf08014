"""Scenario trees of PCA capacities.

A tree is stored flat: a probability per scenario, a capacity profile per
(PCA, scenario), and a list of branches.  Each branch is an inclusive
period interval ``[start, end]`` together with the scenarios that cannot be
told apart during it.  A branch point at period ``t`` means the child
branches start at ``t``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

if TYPE_CHECKING:
    from .instance import Instance

PROB_TOL = 1e-9


@dataclass(frozen=True)
class Branch:
    start: int
    end: int
    scenarios: tuple[int, ...]

    def active(self, t: int) -> bool:
        return self.start <= t <= self.end


@dataclass(frozen=True)
class ScenarioTree:
    """Capacity scenarios plus the branch structure used for nonanticipativity.

    ``capacities[pca][q][t]`` is the capacity of ``pca`` in period ``t``
    under scenario ``q``.
    """

    probabilities: tuple[float, ...]
    capacities: Mapping[str, tuple[tuple[int, ...], ...]]
    branches: tuple[Branch, ...]

    @property
    def n_scenarios(self) -> int:
        return len(self.probabilities)

    def capacity(self, pca: str, t: int, q: int) -> int:
        return self.capacities[pca][q][t]

    def capacity_array(self, pca: str) -> np.ndarray:
        """(scenarios, periods) integer array for one PCA."""
        return np.asarray(self.capacities[pca], dtype=np.int64)

    def split_period(self, q1: int, q2: int) -> int | None:
        """First period at which ``q1`` and ``q2`` sit in different branches.

        ``None`` when the two scenarios are never separated.
        """
        if q1 == q2:
            return None
        for t in range(self._first_period(), self._last_period() + 1):
            together = any(
                b.active(t) and q1 in b.scenarios and q2 in b.scenarios
                for b in self.branches
            )
            if not together:
                return t
        return None

    def _first_period(self) -> int:
        return min(b.start for b in self.branches)

    def _last_period(self) -> int:
        return max(b.end for b in self.branches)


def single_scenario_tree(capacities: Mapping[str, Sequence[int]], horizon: int) -> ScenarioTree:
    """Deterministic tree: one scenario with probability one."""
    caps = {k: (tuple(int(v) for v in row),) for k, row in capacities.items()}
    return ScenarioTree((1.0,), caps, (Branch(0, horizon, (0,)),))


def validate_tree(tree: ScenarioTree, horizon: int, pcas: Iterable[str] | None = None) -> list[str]:
    """Return a list of violations; an empty list means the tree is valid."""
    problems: list[str] = []
    n = tree.n_scenarios
    if n == 0:
        return ["no scenarios"]
    probs = tree.probabilities
    if any(p < 0 for p in probs):
        problems.append("negative probability")
    if abs(sum(probs) - 1.0) > PROB_TOL:
        problems.append(f"probabilities sum != 1 (sum={sum(probs):.12g})")

    if pcas is not None:
        expected = set(pcas)
        missing = expected - set(tree.capacities)
        extra = set(tree.capacities) - expected
        for k in sorted(missing):
            problems.append(f"capacity missing for pca {k}")
        for k in sorted(extra):
            problems.append(f"capacity given for unknown or non-pca resource {k}")
    for k, rows in sorted(tree.capacities.items()):
        if len(rows) != n:
            problems.append(f"capacity of {k}: {len(rows)} scenario rows, expected {n}")
            continue
        for q, row in enumerate(rows):
            if len(row) != horizon + 1:
                problems.append(
                    f"capacity of {k} scenario {q}: {len(row)} periods, expected {horizon + 1}"
                )
            if any((not isinstance(v, (int, np.integer))) or v < 0 for v in row):
                problems.append(f"capacity of {k} scenario {q}: values must be non-negative integers")

    if not tree.branches:
        problems.append("no branches")
        return problems
    for idx, b in enumerate(tree.branches):
        if b.start > b.end:
            problems.append(f"branch {idx}: start {b.start} > end {b.end}")
        if not b.scenarios:
            problems.append(f"branch {idx}: empty scenario set")
        if any(q < 0 or q >= n for q in b.scenarios):
            problems.append(f"branch {idx}: unknown scenario id")
        if b.start < 0 or b.end > horizon:
            problems.append(f"branch {idx}: interval [{b.start},{b.end}] outside [0,{horizon}]")
    if problems:
        return problems

    # cover + partition per period, refinement over time
    prev: set[frozenset[int]] | None = None
    for t in range(0, horizon + 1):
        active = [b for b in tree.branches if b.active(t)]
        seen: dict[int, int] = {}
        for b in active:
            for q in b.scenarios:
                seen[q] = seen.get(q, 0) + 1
        bad = [q for q in range(n) if seen.get(q, 0) != 1]
        if bad:
            problems.append(
                f"period {t}: scenarios {bad} not covered by exactly one branch"
            )
            return problems
        parts = {frozenset(b.scenarios) for b in active}
        if prev is not None:
            for part in parts:
                if not any(part <= p for p in prev):
                    problems.append(
                        f"period {t}: branch {sorted(part)} is not a child of a branch at {t - 1}"
                    )
        prev = parts

    # scenarios sharing a branch at t must agree on every capacity up to t
    for t in range(0, horizon + 1):
        for b in tree.branches:
            if not b.active(t) or len(b.scenarios) < 2:
                continue
            q0 = b.scenarios[0]
            for k, rows in tree.capacities.items():
                for q in b.scenarios[1:]:
                    if tuple(rows[q][: t + 1]) != tuple(rows[q0][: t + 1]):
                        problems.append(
                            f"scenarios {q0} and {q} share a branch at period {t} "
                            f"but capacities of {k} differ by then"
                        )
                        return problems
    return problems


def shared_branches_at(tree: ScenarioTree, t: int) -> list[Branch]:
    """Branches active at period ``t`` (one per group of indistinguishable scenarios)."""
    lo, hi = tree._first_period(), tree._last_period()
    if not lo <= t <= hi:
        raise ValueError(f"period {t} outside tree range [{lo},{hi}]")
    return [b for b in tree.branches if b.active(t)]


def project_scenario(instance: "Instance", q: int) -> "Instance":
    """Deterministic copy of ``instance`` in which scenario ``q`` occurs for sure."""
    tree = instance.scenarios
    if not 0 <= q < tree.n_scenarios:
        raise ValueError(f"scenario {q} out of range (tree has {tree.n_scenarios})")
    caps = {k: (rows[q],) for k, rows in tree.capacities.items()}
    projected = ScenarioTree((1.0,), caps, (Branch(0, instance.horizon, (0,)),))
    return dataclasses.replace(instance, scenarios=projected)


# --- file section --------------------------------------------------------

def tree_to_doc(tree: ScenarioTree) -> dict:
    return {
        "probabilities": list(tree.probabilities),
        "capacities": {
            k: {str(q): list(row) for q, row in enumerate(rows)}
            for k, rows in tree.capacities.items()
        },
        "branches": [
            {"start": b.start, "end": b.end, "scenarios": list(b.scenarios)}
            for b in tree.branches
        ],
    }
