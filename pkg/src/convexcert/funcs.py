"""Function handles, the built-in catalog, and convexity-preserving combinators."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

from .errors import BoundaryError, DimensionError, DomainError, RangeError
from .vecspace import Vector, eu_norm, norm_sq, dot, scalar_mul, vec_add

DEFAULT_BOX = (-10.0, 10.0)
FD_STEP = 1e-5
# eu_norm is not differentiable at 0; samplers stay this far from the origin.
NORM_EXCLUSION_RADIUS = 1e-3
CONST_WITNESS = 1337.0

Box = tuple[tuple[float, float], ...]


def default_box(dim: int, lo: float = DEFAULT_BOX[0], hi: float = DEFAULT_BOX[1]) -> Box:
    return tuple((lo, hi) for _ in range(dim))


@dataclass(frozen=True)
class FunctionHandle:
    """An evaluatable f: R^n -> R with an optional analytic gradient.

    ``claims_L_smooth`` holds the claimed Lipschitz constant of the gradient
    (membership in F_L^1 together with ``claims_convex``), or None when no
    such claim is made. ``control`` marks deliberately pathological entries.
    """

    name: str
    dim: int
    fn: Callable[[Vector], float]
    grad_fn: Optional[Callable[[Vector], Vector]] = None
    box: Box = ()
    claims_convex: bool = False
    claims_L_smooth: Optional[float] = None
    claims_monotone: bool = False
    control: bool = False
    exclude_radius: float = 0.0
    assumptions: tuple[str, ...] = ()
    fd_step: float = FD_STEP

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if not self.box:
            object.__setattr__(self, "box", default_box(self.dim))
        if len(self.box) != self.dim:
            raise DimensionError(len(self.box), self.dim, "box and function")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError(f"empty box interval [{lo}, {hi}]")

    @property
    def has_analytic_grad(self) -> bool:
        return self.grad_fn is not None

    def _check_point(self, x: Vector):
        if x.dim != self.dim:
            raise DimensionError(x.dim, self.dim, f"point and {self.name}")
        for i, (c, (lo, hi)) in enumerate(zip(x.coords, self.box)):
            if not lo <= c <= hi:
                raise DomainError(
                    f"{self.name}: coordinate {i} = {c!r} outside [{lo}, {hi}]", coordinate=i
                )

    def eval(self, x: Vector) -> float:
        self._check_point(x)
        value = float(self.fn(x))
        if not math.isfinite(value):
            raise DomainError(f"{self.name}: non-finite value at {x!r}")
        return value

    def __call__(self, x: Vector) -> float:
        return self.eval(x)

    def grad(self, x: Vector) -> Vector:
        if self.grad_fn is None:
            return self.fd_grad(x)
        self._check_point(x)
        g = self.grad_fn(x)
        if g.dim != self.dim:
            raise DimensionError(g.dim, self.dim, f"gradient of {self.name}")
        return g

    def fd_grad(self, x: Vector, h: Optional[float] = None) -> Vector:
        """Central finite differences, one coordinate at a time."""
        h = self.fd_step if h is None else h
        self._check_point(x)
        for i, (c, (lo, hi)) in enumerate(zip(x.coords, self.box)):
            if c - h < lo or c + h > hi:
                raise BoundaryError(
                    f"{self.name}: coordinate {i} = {c!r} within FD step {h} of [{lo}, {hi}]",
                    coordinate=i,
                )
        base = list(x.coords)
        out = []
        for i in range(self.dim):
            fwd = base.copy()
            bwd = base.copy()
            fwd[i] += h
            bwd[i] -= h
            out.append((self.eval(Vector(fwd)) - self.eval(Vector(bwd))) / (2.0 * h))
        return Vector(out)


# ---------------------------------------------------------------- catalog


def square(name: str = "square") -> FunctionHandle:
    return FunctionHandle(
        name=name,
        dim=1,
        fn=lambda x: x[0] * x[0],
        grad_fn=lambda x: Vector([2.0 * x[0]]),
        claims_convex=True,
        claims_L_smooth=2.0,
    )


def square_pos(name: str = "sqpos") -> FunctionHandle:
    """t -> max(t, 0)^2: convex, nondecreasing on all of R."""
    return FunctionHandle(
        name=name,
        dim=1,
        fn=lambda x: max(x[0], 0.0) ** 2,
        grad_fn=lambda x: Vector([2.0 * max(x[0], 0.0)]),
        claims_convex=True,
        claims_L_smooth=2.0,
        claims_monotone=True,
    )


def _norm_grad(x: Vector) -> Vector:
    r = eu_norm(x)
    if r == 0.0:
        # 0 is a subgradient at the kink
        return Vector([0.0] * x.dim)
    return Vector([c / r for c in x.coords])


def eu_norm_fn(dim: int, name: str = "norm") -> FunctionHandle:
    return FunctionHandle(
        name=name,
        dim=dim,
        fn=eu_norm,
        grad_fn=_norm_grad,
        claims_convex=True,
        exclude_radius=NORM_EXCLUSION_RADIUS,
    )


def norm_sq_fn(dim: int, name: str = "norm2") -> FunctionHandle:
    return FunctionHandle(
        name=name,
        dim=dim,
        fn=norm_sq,
        grad_fn=lambda x: Vector([2.0 * c for c in x.coords]),
        claims_convex=True,
        claims_L_smooth=2.0,
    )


def neg_norm_sq(dim: int, name: str = "neg_norm2") -> FunctionHandle:
    return FunctionHandle(
        name=name,
        dim=dim,
        fn=lambda x: -norm_sq(x),
        grad_fn=lambda x: Vector([-2.0 * c for c in x.coords]),
        control=True,
    )


def const_c(dim: int, c: float = CONST_WITNESS, name: Optional[str] = None) -> FunctionHandle:
    c = float(c)
    return FunctionHandle(
        name=name or f"const({c!r})",
        dim=dim,
        fn=lambda x: c,
        grad_fn=lambda x: Vector([0.0] * dim),
        claims_convex=True,
        claims_L_smooth=0.0,
    )


def affine(g: Sequence[float], b: float = 0.0, name: Optional[str] = None) -> FunctionHandle:
    gv = Vector(g)
    b = float(b)
    return FunctionHandle(
        name=name or f"affine({', '.join(repr(c) for c in (*gv.coords, b))})",
        dim=gv.dim,
        fn=lambda x: dot(gv, x) + b,
        grad_fn=lambda x: gv,
        claims_convex=True,
        claims_L_smooth=0.0,
    )


def diag_quadratic(d: Sequence[float], name: Optional[str] = None) -> FunctionHandle:
    d = tuple(float(v) for v in d)
    if not d:
        raise ValueError("diag_quadratic needs at least one weight")
    if any(v < 0 or not math.isfinite(v) for v in d):
        raise RangeError(f"diag_quadratic weights must be finite and >= 0, got {d}")

    def fn(x):
        acc = 0.0
        for w, c in zip(d, x.coords):
            acc += w * c * c
        return acc

    return FunctionHandle(
        name=name or f"diagq({', '.join(repr(v) for v in d)})",
        dim=len(d),
        fn=fn,
        grad_fn=lambda x: Vector([2.0 * w * c for w, c in zip(d, x.coords)]),
        claims_convex=True,
        claims_L_smooth=2.0 * max(d),
    )


def quartic1d(name: str = "quartic") -> FunctionHandle:
    """x^4: convex, but its derivative is not globally Lipschitz."""
    return FunctionHandle(
        name=name,
        dim=1,
        fn=lambda x: x[0] ** 4,
        grad_fn=lambda x: Vector([4.0 * x[0] ** 3]),
        claims_convex=True,
        control=True,
    )


# ------------------------------------------------------------ combinators


def _intersect_boxes(f: FunctionHandle, g: FunctionHandle) -> Box:
    box = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(f.box, g.box))
    for i, (lo, hi) in enumerate(box):
        if not lo < hi:
            raise DomainError(f"domain boxes of {f.name} and {g.name} are disjoint", coordinate=i)
    return box


def scale(a: float, f: FunctionHandle, name: Optional[str] = None) -> FunctionHandle:
    """``a * f`` for ``a >= 0``."""
    a = float(a)
    if not math.isfinite(a) or a < 0:
        raise RangeError(f"scale factor must be finite and >= 0 to preserve convexity, got {a!r}")
    fn, grad_fn = f.fn, f.grad_fn
    return FunctionHandle(
        name=name or f"scale({a!r}, {f.name})",
        dim=f.dim,
        fn=lambda x: a * fn(x),
        grad_fn=None if grad_fn is None else (lambda x: scalar_mul(a, grad_fn(x))),
        box=f.box,
        claims_convex=f.claims_convex,
        claims_L_smooth=None if f.claims_L_smooth is None else a * f.claims_L_smooth,
        claims_monotone=f.claims_monotone,
        control=f.control,
        exclude_radius=f.exclude_radius,
        assumptions=f.assumptions,
        fd_step=f.fd_step,
    )


def fn_sum(f: FunctionHandle, g: FunctionHandle, name: Optional[str] = None) -> FunctionHandle:
    if f.dim != g.dim:
        raise DimensionError(f.dim, g.dim, f"{f.name} and {g.name}")
    ff, gf = f.fn, g.fn
    fg, gg = f.grad_fn, g.grad_fn
    grad_fn = None
    if fg is not None and gg is not None:
        grad_fn = lambda x: vec_add(fg(x), gg(x))  # noqa: E731
    lip = None
    if f.claims_L_smooth is not None and g.claims_L_smooth is not None:
        lip = f.claims_L_smooth + g.claims_L_smooth
    return FunctionHandle(
        name=name or f"sum({f.name}, {g.name})",
        dim=f.dim,
        fn=lambda x: ff(x) + gf(x),
        grad_fn=grad_fn,
        box=_intersect_boxes(f, g),
        claims_convex=f.claims_convex and g.claims_convex,
        claims_L_smooth=lip,
        claims_monotone=f.claims_monotone and g.claims_monotone,
        control=f.control or g.control,
        exclude_radius=max(f.exclude_radius, g.exclude_radius),
        assumptions=f.assumptions + g.assumptions,
        fd_step=min(f.fd_step, g.fd_step),
    )


def compose_mono(h: FunctionHandle, f: FunctionHandle, name: Optional[str] = None) -> FunctionHandle:
    """``h o f`` where the caller asserts h is convex and nondecreasing.

    The assertion is recorded in ``assumptions`` and not verified here; see
    :func:`convexcert.checker.check_compose_assumptions`. ``h`` is applied as a
    map on the whole real line, its sampling box is not enforced.
    """
    if h.dim != 1:
        raise DimensionError(h.dim, 1, f"outer function {h.name} (must be 1-D)")
    hf, hg = h.fn, h.grad_fn
    ff, fg = f.fn, f.grad_fn

    def fn(x):
        return hf(Vector([ff(x)]))

    grad_fn = None
    if hg is not None and fg is not None:
        def grad_fn(x):
            return scalar_mul(hg(Vector([ff(x)]))[0], fg(x))

    note = f"{h.name} is convex and nondecreasing"
    return FunctionHandle(
        name=name or f"compose({h.name}, {f.name})",
        dim=f.dim,
        fn=fn,
        grad_fn=grad_fn,
        box=f.box,
        claims_convex=f.claims_convex and h.claims_convex,
        claims_L_smooth=None,
        control=f.control or h.control,
        exclude_radius=f.exclude_radius,
        assumptions=f.assumptions + h.assumptions + (note,),
        fd_step=f.fd_step,
    )


def with_box(f: FunctionHandle, box: Box) -> FunctionHandle:
    return replace(f, box=tuple((float(lo), float(hi)) for lo, hi in box))
