"""Sparse mixed-integer linear program container (minimization)."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

NAME_LIMIT = 255
SENSES = ("L", "E", "G")  # <=, =, >=


@dataclass(frozen=True, eq=False)
class MipModel:
    """min c.x + constant  s.t.  rows (A x  sense  rhs),  lb <= x <= ub.

    ``A`` is CSR with one row per constraint; ``integer`` flags integrality.
    """

    name: str
    var_names: tuple[str, ...]
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    row_names: tuple[str, ...]
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    c: np.ndarray
    constant: float = 0.0

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    @property
    def nnz(self) -> int:
        return int(self.A.nnz)

    @property
    def is_mip(self) -> bool:
        return bool(self.integer.any())

    def objective(self, x) -> float:
        return float(self.c @ np.asarray(x, dtype=float)) + self.constant

    def violation(self, x) -> float:
        """Largest bound or row violation of point ``x``."""
        x = np.asarray(x, dtype=float)
        worst = max(0.0, float(np.max(self.lb - x, initial=0.0)), float(np.max(x - self.ub, initial=0.0)))
        if self.n_rows:
            ax = self.A @ x
            d = ax - self.rhs
            worst = max(
                worst,
                float(np.max(np.where(self.sense == "L", d, 0.0), initial=0.0)),
                float(np.max(np.where(self.sense == "G", -d, 0.0), initial=0.0)),
                float(np.max(np.where(self.sense == "E", np.abs(d), 0.0), initial=0.0)),
            )
        return worst

    def check(self) -> None:
        if len(set(self.var_names)) != self.n_vars:
            raise ValueError("duplicate variable names")
        if len(set(self.row_names)) != self.n_rows:
            raise ValueError("duplicate row names")
        if np.any(self.lb > self.ub):
            k = int(np.argmax(self.lb > self.ub))
            raise ValueError(f"variable {self.var_names[k]}: lower bound above upper bound")
        if self.A.shape != (self.n_rows, self.n_vars):
            raise ValueError("constraint matrix shape does not match names")


def relax(model: MipModel) -> MipModel:
    """Same model with every integrality flag cleared."""
    return dataclasses.replace(model, name=model.name, integer=np.zeros(model.n_vars, dtype=bool))


def model_stats(model: MipModel) -> tuple[int, int, int]:
    """(variables, constraints, structural nonzeros)."""
    return model.n_vars, model.n_rows, model.nnz


def shorten_name(name: str, taken: set[str], limit: int = NAME_LIMIT) -> str:
    """Truncate ``name`` to ``limit`` chars with a hash suffix; avoid collisions."""
    if len(name) <= limit:
        return name
    salt = 0
    while True:
        digest = hashlib.sha1(f"{name}#{salt}".encode()).hexdigest()[:10]
        short = name[: limit - 11] + "~" + digest
        if short not in taken:
            return short
        salt += 1


class ModelBuilder:
    """Accumulates columns and rows, then freezes them into a MipModel."""

    def __init__(self, name: str = "model"):
        self.name = name
        self._names: list[str] = []
        self._lb: list[float] = []
        self._ub: list[float] = []
        self._int: list[bool] = []
        self._obj: dict[int, float] = {}
        self._row_names: list[str] = []
        self._sense: list[str] = []
        self._rhs: list[float] = []
        self._indptr: list[int] = [0]
        self._cols: list[int] = []
        self._vals: list[float] = []
        self._taken: set[str] = set()
        self.constant = 0.0

    @property
    def n_vars(self) -> int:
        return len(self._names)

    def _unique(self, name: str) -> str:
        name = shorten_name(name, self._taken)
        if name in self._taken:
            raise ValueError(f"duplicate name {name}")
        self._taken.add(name)
        return name

    def add_var(self, name: str, lb: float = 0.0, ub: float = np.inf, integer: bool = False) -> int:
        lb = -np.inf if lb is None else lb
        ub = np.inf if ub is None else ub
        if np.isnan(lb) or np.isnan(ub):
            raise ValueError(f"variable {name}: NaN bound")
        self._names.append(self._unique(name))
        self._lb.append(lb)
        self._ub.append(ub)
        self._int.append(integer)
        return len(self._names) - 1

    def add_obj(self, col: int, coef: float) -> None:
        if coef:
            self._obj[col] = self._obj.get(col, 0.0) + coef

    def add_row(self, name: str, cols, vals, sense: str, rhs: float) -> int:
        """Add a row; repeated columns are summed and zero terms dropped."""
        if sense not in SENSES:
            raise ValueError(f"bad sense {sense!r}")
        acc: dict[int, float] = {}
        for c, v in zip(cols, vals):
            acc[c] = acc.get(c, 0.0) + v
        for c in sorted(acc):
            v = acc[c]
            if v != 0.0:
                self._cols.append(c)
                self._vals.append(v)
        self._indptr.append(len(self._cols))
        self._row_names.append(self._unique(name))
        self._sense.append(sense)
        self._rhs.append(float(rhs))
        return len(self._row_names) - 1

    def build(self) -> MipModel:
        n = len(self._names)
        m = len(self._row_names)
        A = sp.csr_matrix(
            (np.asarray(self._vals, dtype=float), np.asarray(self._cols, dtype=np.int64),
             np.asarray(self._indptr, dtype=np.int64)),
            shape=(m, n),
        )
        c = np.zeros(n)
        for k, v in self._obj.items():
            c[k] = v
        model = MipModel(
            name=self.name,
            var_names=tuple(self._names),
            lb=np.asarray(self._lb, dtype=float),
            ub=np.asarray(self._ub, dtype=float),
            integer=np.asarray(self._int, dtype=bool),
            row_names=tuple(self._row_names),
            A=A,
            sense=np.asarray(self._sense, dtype="<U1"),
            rhs=np.asarray(self._rhs, dtype=float),
            c=c,
            constant=self.constant,
        )
        model.check()
        return model


def from_dense(c, rows, lb=None, ub=None, integer=None, name="model") -> MipModel:
    """Small helper for tests: ``rows`` is a list of (coeffs, sense, rhs)."""
    n = len(c)
    b = ModelBuilder(name)
    lb = [0.0] * n if lb is None else lb
    ub = [np.inf] * n if ub is None else ub
    integer = [False] * n if integer is None else integer
    for k in range(n):
        b.add_var(f"x{k}", lb[k], ub[k], bool(integer[k]))
        b.add_obj(k, c[k])
    for r, (coef, sense, rhs) in enumerate(rows):
        b.add_row(f"r{r}", range(n), coef, sense, rhs)
    return b.build()
