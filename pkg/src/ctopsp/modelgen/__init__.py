"""Builders for the six stochastic programs: {two-stage, semi-dynamic, dynamic}
x {Lagrangian, Lagrangian-Eulerian}."""

from __future__ import annotations

from ..mip.model import model_stats
from .eulerian import GROUND_CG, GROUND_CG_MINUS_CA, build_lagrangian_eulerian
from .lagrangian import build_lagrangian
from .varmap import (
    DYNAMIC, EULERIAN, FAMILIES, LAGRANGIAN, POLICIES, SEMI_DYNAMIC, TWO_STAGE, VarKey, VarMap,
)


def build_model(instance, family: str, policy: str, ground: str = GROUND_CG):
    """Dispatch on family; returns (MipModel, VarMap)."""
    if family == LAGRANGIAN:
        return build_lagrangian(instance, policy)
    if family == EULERIAN:
        return build_lagrangian_eulerian(instance, policy, ground)
    raise ValueError(f"unknown model family {family!r}")


def variant_name(family: str, policy: str) -> str:
    return f"{family}/{policy}"


__all__ = [
    "DYNAMIC", "EULERIAN", "FAMILIES", "GROUND_CG", "GROUND_CG_MINUS_CA", "LAGRANGIAN", "POLICIES",
    "SEMI_DYNAMIC", "TWO_STAGE", "VarKey", "VarMap", "build_lagrangian", "build_lagrangian_eulerian",
    "build_model", "model_stats", "variant_name",
]
