"""Real vector arithmetic on R^n with the dot product and Euclidean metric.

Everything here is a pure function of immutable inputs. Dimension mismatches
are hard errors; there is no broadcasting. Tolerances are not applied here,
callers compare raw values against a policy owned by :mod:`convexcert.checker`.
"""
from __future__ import annotations

import math
from typing import Iterable

from .errors import DimensionError, RangeError

__all__ = [
    "Vector",
    "zero",
    "dot",
    "eu_norm",
    "norm_sq",
    "metric_sq",
    "eu_metric",
    "vec_add",
    "vec_sub",
    "scalar_mul",
    "convex_combo",
]


_isfinite = math.isfinite
_set = object.__setattr__


class Vector:
    """Immutable point of R^n with finite double-precision coordinates."""

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[float]):
        values = tuple(map(float, coords))
        if not values:
            raise ValueError("a Vector needs at least one coordinate")
        if not all(map(_isfinite, values)):
            i = next(i for i, c in enumerate(values) if not _isfinite(c))
            raise ValueError(f"coordinate {i} is not finite: {values[i]!r}")
        _set(self, "coords", values)

    def __setattr__(self, name, value):
        raise AttributeError("Vector is immutable")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __eq__(self, other):
        if isinstance(other, Vector):
            return self.coords == other.coords
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"Vector({list(self.coords)!r})"

    def tolist(self) -> list[float]:
        return list(self.coords)


def _check_dims(u: Vector, v: Vector):
    if u.dim != v.dim:
        raise DimensionError(u.dim, v.dim)


def _scalar(a) -> float:
    a = float(a)
    if not math.isfinite(a):
        raise RangeError(f"scalar must be finite, got {a!r}")
    return a


def zero(n: int) -> Vector:
    return Vector([0.0] * n)


def dot(u: Vector, v: Vector) -> float:
    """Sum of coordinate products, accumulated in index order."""
    _check_dims(u, v)
    acc = 0.0
    for a, b in zip(u.coords, v.coords):
        acc += a * b
    return acc


def norm_sq(v: Vector) -> float:
    return dot(v, v)


def eu_norm(v: Vector) -> float:
    return math.sqrt(dot(v, v))


def vec_add(x: Vector, y: Vector) -> Vector:
    _check_dims(x, y)
    return Vector([a + b for a, b in zip(x.coords, y.coords)])


def vec_sub(x: Vector, y: Vector) -> Vector:
    _check_dims(x, y)
    return Vector([a - b for a, b in zip(x.coords, y.coords)])


def scalar_mul(a: float, x: Vector) -> Vector:
    a = _scalar(a)
    return Vector([a * c for c in x.coords])


def metric_sq(x: Vector, y: Vector) -> float:
    return norm_sq(vec_sub(x, y))


def eu_metric(x: Vector, y: Vector) -> float:
    return math.sqrt(metric_sq(x, y))


def convex_combo(alpha: float, x: Vector, y: Vector) -> Vector:
    """Return ``alpha*x + (1-alpha)*y`` for ``alpha`` in [0, 1]."""
    alpha = _scalar(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"convex weight must lie in [0, 1], got {alpha!r}")
    _check_dims(x, y)
    beta = 1.0 - alpha
    return Vector([alpha * a + beta * b for a, b in zip(x.coords, y.coords)])
