"""The single tolerance authority used by every check."""
from __future__ import annotations

from dataclasses import dataclass

DEFAULT_ABS_TOL = 1e-9
DEFAULT_REL_TOL = 1e-7


@dataclass(frozen=True)
class ToleranceMode:
    abs_tol: float = DEFAULT_ABS_TOL
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")

    def bound(self, scale: float = 1.0) -> float:
        return self.abs_tol + self.rel_tol * max(1.0, scale)

    def accept(self, residual: float, scale: float = 1.0) -> bool:
        """True when ``residual`` is small enough to count as satisfied.

        ``scale`` is the magnitude of the compared sides; values below 1 are
        clamped to 1.
        """
        return residual <= self.bound(scale)


def side_scale(lhs: float, rhs: float) -> float:
    return max(1.0, abs(lhs), abs(rhs))
