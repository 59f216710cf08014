"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``CTOPSP_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pure

BACKEND = "pure"
if not os.environ.get("CTOPSP_PURE"):
    try:
        from . import _speedups as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
else:
    _impl = _pure

min_total_holding = _impl.min_total_holding
joint_min = _impl.joint_min

__all__ = ["BACKEND", "joint_min", "min_total_holding"]
