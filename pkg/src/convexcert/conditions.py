"""Residual evaluators for the smoothness and convexity inequalities.

Each inequality is written as ``lhs <= rhs`` and its residual is
``lhs - rhs``: an instance satisfies the condition when the residual is at
most the tolerance bound. Gradients come from :meth:`FunctionHandle.grad`, so
analytic gradients are used whenever a handle provides one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from .errors import DimensionError, InapplicableInstance, RangeError
from .funcs import FunctionHandle
from .tolerance import ToleranceMode, side_scale
from .vecspace import (
    Vector,
    convex_combo,
    dot,
    eu_metric,
    eu_norm,
    metric_sq,
    norm_sq,
    vec_sub,
)


class ConditionId(str, enum.Enum):
    NEST0 = "nest0"
    NEST1 = "nest1"
    NEST2 = "nest2"
    NEST3 = "nest3"
    NEST4 = "nest4"
    NEST5 = "nest5"
    NEST6 = "nest6"
    CONVEX0 = "convex0"
    CONVEX1 = "convex1"

    @property
    def needs_alpha(self) -> bool:
        return self in _ALPHA_CONDS

    @property
    def uses_L(self) -> bool:
        return self not in (ConditionId.CONVEX0, ConditionId.CONVEX1)

    @classmethod
    def parse(cls, text: str) -> "ConditionId":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown condition {text!r}; expected one of {names}") from None

    def __str__(self):
        return self.value


_ALPHA_CONDS = frozenset({ConditionId.NEST5, ConditionId.NEST6, ConditionId.CONVEX0})

NESTEROV = tuple(ConditionId(f"nest{i}") for i in range(7))


@dataclass(frozen=True)
class ConditionInstance:
    cond: ConditionId
    f: FunctionHandle
    x: Vector
    y: Vector
    L: float = 1.0
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.x.dim != self.y.dim:
            raise DimensionError(self.x.dim, self.y.dim, "x and y")
        if self.x.dim != self.f.dim:
            raise DimensionError(self.x.dim, self.f.dim, f"points and {self.f.name}")
        if self.cond.uses_L and not (self.L > 0 and self.L < float("inf")):
            raise RangeError(f"{self.cond}: L must be finite and > 0, got {self.L!r}")
        if self.cond.needs_alpha:
            if self.alpha is None:
                raise RangeError(f"{self.cond} requires an alpha argument")
            if not 0.0 <= self.alpha <= 1.0:
                raise RangeError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    def with_points(self, x: Vector, y: Vector, alpha: Optional[float] = None) -> "ConditionInstance":
        return ConditionInstance(self.cond, self.f, x, y, self.L, self.alpha if alpha is None else alpha)


def sides(inst: ConditionInstance) -> tuple[float, float]:
    """Return ``(lhs, rhs)`` of the inequality ``lhs <= rhs`` at ``inst``."""
    cond, f, x, y, L, a = inst.cond, inst.f, inst.x, inst.y, inst.L, inst.alpha

    if cond is ConditionId.NEST0:
        return eu_metric(f.grad(x), f.grad(y)), L * eu_metric(x, y)

    if cond is ConditionId.NEST1:
        return f.eval(y), f.eval(x) + dot(f.grad(x), vec_sub(y, x)) + (L / 2.0) * metric_sq(x, y)

    if cond is ConditionId.NEST2:
        gx, gy = f.grad(x), f.grad(y)
        lhs = f.eval(x) + dot(gx, vec_sub(y, x)) + (1.0 / (2.0 * L)) * metric_sq(gx, gy)
        return lhs, f.eval(y)

    if cond is ConditionId.NEST3:
        gx, gy = f.grad(x), f.grad(y)
        return (1.0 / L) * metric_sq(gx, gy), dot(vec_sub(gx, gy), vec_sub(x, y))

    if cond is ConditionId.NEST4:
        gx, gy = f.grad(x), f.grad(y)
        return dot(vec_sub(gx, gy), vec_sub(x, y)), L * metric_sq(x, y)

    if cond is ConditionId.NEST5:
        gx, gy = f.grad(x), f.grad(y)
        fz = f.eval(convex_combo(a, x, y))
        lhs = fz + (a * (1.0 - a) / (2.0 * L)) * metric_sq(gx, gy)
        return lhs, a * f.eval(x) + (1.0 - a) * f.eval(y)

    if cond is ConditionId.NEST6:
        fz = f.eval(convex_combo(a, x, y))
        lhs = a * f.eval(x) + (1.0 - a) * f.eval(y)
        return lhs, fz + a * (1.0 - a) * (L / 2.0) * metric_sq(x, y)

    if cond is ConditionId.CONVEX0:
        return f.eval(convex_combo(a, x, y)), a * f.eval(x) + (1.0 - a) * f.eval(y)

    if cond is ConditionId.CONVEX1:
        return f.eval(x) + dot(f.grad(x), vec_sub(y, x)), f.eval(y)

    raise ValueError(f"unknown condition {cond!r}")


def residual(inst: ConditionInstance) -> float:
    lhs, rhs = sides(inst)
    return lhs - rhs


def residual_and_scale(inst: ConditionInstance) -> tuple[float, float]:
    lhs, rhs = sides(inst)
    return lhs - rhs, side_scale(lhs, rhs)


def cauchy_schwarz_gap(u: Vector, v: Vector) -> float:
    """``|u| |v| - |<u, v>|``; never meaningfully negative."""
    if u.dim != v.dim:
        raise DimensionError(u.dim, v.dim)
    return eu_norm(u) * eu_norm(v) - abs(dot(u, v))


def _check_weight(a: float):
    if not 0.0 <= a <= 1.0:
        raise RangeError(f"weight must lie in [0, 1], got {a!r}")


def square_identity_gap(x: float, y: float, a: float) -> float:
    _check_weight(a)
    lhs = a * x * x + (1.0 - a) * y * y - (a * x + (1.0 - a) * y) ** 2
    return lhs - a * (1.0 - a) * (x - y) ** 2


def norm_lemma_gap(x: Vector, y: Vector, a: float) -> float:
    _check_weight(a)
    if x.dim != y.dim:
        raise DimensionError(x.dim, y.dim)
    return a * norm_sq(x) + (1.0 - a) * norm_sq(y) - a * (1.0 - a) * metric_sq(x, y)


def chain_0_implies_4_gap(
    f: FunctionHandle, L: float, x: Vector, y: Vector, tol: Optional[ToleranceMode] = None
) -> tuple[float, float]:
    """Both gaps of ``L|x-y|^2 >= |g(x)-g(y)| |x-y| >= <g(x)-g(y), x-y>``.

    Raises :class:`InapplicableInstance` when the gradient Lipschitz bound
    fails at ``(x, y)``, since the first link only follows from it.
    """
    tol = tol or ToleranceMode()
    r0, s0 = residual_and_scale(ConditionInstance(ConditionId.NEST0, f, x, y, L))
    if not tol.accept(r0, s0):
        raise InapplicableInstance(f"gradient Lipschitz bound fails at this pair (residual {r0!r})")
    dg = vec_sub(f.grad(x), f.grad(y))
    dx = vec_sub(x, y)
    middle = eu_norm(dg) * eu_norm(dx)
    return L * norm_sq(dx) - middle, middle - dot(dg, dx)
