"""LP-format and free-MPS writers.

Output is a pure function of the model: same model, same bytes.  Numbers
are printed with 12 significant digits.
"""

from __future__ import annotations

import io
import math
import re

import numpy as np

from .model import NAME_LIMIT, MipModel

_LP_NAME = re.compile(r"^[A-Za-z!\"#$%&()/,.;?@_`'{}|~][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]*$")
_LP_OP = {"L": "<=", "E": "=", "G": ">="}
_TERMS_PER_LINE = 8
OBJ_ROW = "obj"


class FormatError(ValueError):
    pass


def fmt(v: float) -> str:
    if v == 0:
        return "0"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    s = "%.12g" % v
    return s


def _check_names(model: MipModel, fmt_name: str) -> None:
    for kind, names in (("variable", model.var_names), ("constraint", model.row_names)):
        for n in names:
            if len(n) > NAME_LIMIT:
                raise FormatError(f"{kind} name too long for {fmt_name} ({len(n)} > {NAME_LIMIT}): {n}")
            if fmt_name == "lp" and not _LP_NAME.match(n):
                raise FormatError(f"{kind} name not valid in LP format: {n}")
            if fmt_name == "mps" and (not n or any(ch.isspace() for ch in n)):
                raise FormatError(f"{kind} name not valid in MPS format: {n!r}")
    if OBJ_ROW in model.row_names:
        raise FormatError(f"constraint name {OBJ_ROW!r} is reserved for the objective")


def write_model(model: MipModel, format: str = "lp") -> str:
    """Render ``model`` as ``"lp"`` or ``"mps"`` text."""
    model.check()
    if format == "lp":
        return _write_lp(model)
    if format == "mps":
        return _write_mps(model)
    raise ValueError(f"unknown format {format!r}")


def _terms(cols, vals, names) -> list[str]:
    out = []
    for c, v in zip(cols, vals):
        s = fmt(abs(v))
        sign = "-" if v < 0 else "+"
        out.append(f"{sign} {s} {names[c]}")
    return out


def _emit_expr(buf: io.StringIO, head: str, terms: list[str], tail: str) -> None:
    if terms and terms[0].startswith("+ "):
        terms[0] = terms[0][2:]
    lines = [" ".join(terms[k:k + _TERMS_PER_LINE]) for k in range(0, len(terms), _TERMS_PER_LINE)]
    buf.write(f" {head}: " + ("\n   ".join(lines) if lines else ""))
    buf.write(tail + "\n")


def _write_lp(model: MipModel) -> str:
    _check_names(model, "lp")
    names = model.var_names
    buf = io.StringIO()
    buf.write(f"\\ Problem: {model.name}\n")
    buf.write("Minimize\n")
    nz = np.flatnonzero(model.c)
    terms = _terms(nz, model.c[nz], names)
    # LP readers only know columns that appear in some expression
    used = np.zeros(model.n_vars, dtype=bool)
    used[model.A.indices] = True
    used[nz] = True
    terms.extend(f"+ 0 {names[k]}" for k in np.flatnonzero(~used))
    if model.constant:
        terms.append(("+ " if model.constant > 0 else "- ") + fmt(abs(model.constant)))
    _emit_expr(buf, OBJ_ROW, terms, "")
    buf.write("Subject To\n")
    A = model.A
    for r in range(model.n_rows):
        lo, hi = A.indptr[r], A.indptr[r + 1]
        terms = _terms(A.indices[lo:hi], A.data[lo:hi], names)
        if not terms and model.n_vars:
            terms = [f"0 {names[0]}"]
        _emit_expr(buf, model.row_names[r], terms, f" {_LP_OP[model.sense[r]]} {fmt(model.rhs[r])}")
    buf.write("Bounds\n")
    for k, n in enumerate(names):
        lb, ub = model.lb[k], model.ub[k]
        if lb == 0 and ub == np.inf:
            continue
        if lb == -np.inf and ub == np.inf:
            buf.write(f" {n} free\n")
        elif lb == ub:
            buf.write(f" {n} = {fmt(lb)}\n")
        else:
            buf.write(f" {fmt(lb)} <= {n} <= {fmt(ub)}\n")
    ints = np.flatnonzero(model.integer)
    if len(ints):
        buf.write("Generals\n")
        for k in range(0, len(ints), _TERMS_PER_LINE):
            buf.write(" " + " ".join(names[c] for c in ints[k:k + _TERMS_PER_LINE]) + "\n")
    buf.write("End\n")
    return buf.getvalue()


def _write_mps(model: MipModel) -> str:
    _check_names(model, "mps")
    buf = io.StringIO()
    buf.write(f"NAME {model.name}\n")
    buf.write("ROWS\n")
    buf.write(f" N {OBJ_ROW}\n")
    for r, n in enumerate(model.row_names):
        buf.write(f" {model.sense[r]} {n}\n")
    buf.write("COLUMNS\n")
    At = model.A.tocsc()
    in_int = False
    marker = 0
    rows = model.row_names
    for k, n in enumerate(model.var_names):
        is_int = bool(model.integer[k])
        if is_int and not in_int:
            buf.write(f"    MARKER{marker} 'MARKER' 'INTORG'\n")
            in_int = True
        elif not is_int and in_int:
            buf.write(f"    MARKER{marker} 'MARKER' 'INTEND'\n")
            marker += 1
            in_int = False
        entries = []
        if model.c[k] != 0:
            entries.append((OBJ_ROW, model.c[k]))
        lo, hi = At.indptr[k], At.indptr[k + 1]
        for r, v in zip(At.indices[lo:hi], At.data[lo:hi]):
            entries.append((rows[r], v))
        if not entries:
            entries.append((OBJ_ROW, 0.0))
        for rname, v in entries:
            buf.write(f"    {n} {rname} {fmt(v)}\n")
    if in_int:
        buf.write(f"    MARKER{marker} 'MARKER' 'INTEND'\n")
    buf.write("RHS\n")
    if model.constant:
        buf.write(f"    RHS {OBJ_ROW} {fmt(-model.constant)}\n")
    for r, n in enumerate(rows):
        if model.rhs[r] != 0:
            buf.write(f"    RHS {n} {fmt(model.rhs[r])}\n")
    buf.write("BOUNDS\n")
    for k, n in enumerate(model.var_names):
        lb, ub = model.lb[k], model.ub[k]
        if lb == ub:
            buf.write(f"    FX BND {n} {fmt(lb)}\n")
            continue
        if lb == -np.inf and ub == np.inf:
            buf.write(f"    FR BND {n}\n")
            continue
        if lb == -np.inf:
            buf.write(f"    MI BND {n}\n")
        elif lb != 0:
            buf.write(f"    LO BND {n} {fmt(lb)}\n")
        if ub != np.inf:
            buf.write(f"    UP BND {n} {fmt(ub)}\n")
        elif model.integer[k]:
            # some readers default integer columns to binary
            buf.write(f"    PL BND {n}\n")
    buf.write("ENDATA\n")
    return buf.getvalue()
