"""Seeded randomized falsification of inequalities, with counterexample shrinking.

Samples are drawn up front from a counter-based Philox stream keyed by the
seed, so sample ``i`` depends only on the seed and the sampling settings,
never on evaluation order. Every condition checked with the same config sees
the same points, which keeps verdicts across conditions paired.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .conditions import (
    ConditionId,
    ConditionInstance,
    cauchy_schwarz_gap,
    chain_0_implies_4_gap,
    norm_lemma_gap,
    residual_and_scale,
    square_identity_gap,
)
from .errors import ConfigError, DomainError, InapplicableInstance, RangeError
from .funcs import Box, FunctionHandle
from .tolerance import ToleranceMode, side_scale
from .vecspace import (
    Vector,
    dot,
    eu_metric,
    eu_norm,
    metric_sq,
    norm_sq,
    scalar_mul,
    vec_add,
)

__all__ = [
    "ToleranceMode",
    "SampleConfig",
    "SampleSet",
    "NoCounterexample",
    "Counterexample",
    "Verdict",
    "draw_samples",
    "falsify",
    "shrink",
    "axiom_suite",
    "identity_suite",
    "chain_suite",
    "check_compose_assumptions",
]

log = logging.getLogger(__name__)

ALPHA_STRATEGIES = ("uniform01", "endpoints_plus_uniform", "near_zero")
PAIR_STRATEGIES = ("independent", "nearby")
AXIOM_DIMS = (1, 2, 3, 5, 10)
MAX_SHRINK_STEPS = 200
ENDPOINT_PROB = 0.1
_NEAR_ZERO = np.array([1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6])

# errors that mark a sample as unevaluable rather than as a violation
_SKIPPABLE = (DomainError, RangeError, ValueError, ZeroDivisionError, OverflowError)


@dataclass(frozen=True)
class SampleConfig:
    """Sampling settings. ``box`` of None means the function's own domain box;
    a single ``(lo, hi)`` pair is applied to every coordinate. ``alpha_strategy``
    of None picks endpoints_plus_uniform for nest5/nest6 and uniform01 otherwise.
    ``sigma`` of None means 0.1 times the box width for nearby pairs.
    """

    seed: int = 0
    n_samples: int = 10_000
    box: Optional[Union[Box, tuple[float, float]]] = None
    alpha_strategy: Optional[str] = None
    pair_strategy: str = "independent"
    sigma: Optional[float] = None
    tolerance: ToleranceMode = field(default_factory=ToleranceMode)

    def __post_init__(self):
        if self.n_samples < 1:
            raise ConfigError("n_samples must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.alpha_strategy is not None and self.alpha_strategy not in ALPHA_STRATEGIES:
            raise ConfigError(f"unknown alpha strategy {self.alpha_strategy!r}")
        if self.pair_strategy not in PAIR_STRATEGIES:
            raise ConfigError(f"unknown pair strategy {self.pair_strategy!r}")

    def with_(self, **changes) -> "SampleConfig":
        return replace(self, **changes)

    def alpha_for(self, cond: ConditionId) -> str:
        if self.alpha_strategy is not None:
            return self.alpha_strategy
        if cond in (ConditionId.NEST5, ConditionId.NEST6):
            return "endpoints_plus_uniform"
        return "uniform01"

    def resolve_box(self, dim: int, default: Box) -> Box:
        if self.box is None:
            return default
        box = self.box
        if len(box) == 2 and not isinstance(box[0], (tuple, list)):
            box = tuple((float(box[0]), float(box[1])) for _ in range(dim))
        if len(box) != dim:
            raise ConfigError(f"box has {len(box)} intervals, function has dim {dim}")
        for lo, hi in box:
            if not lo < hi:
                raise ConfigError(f"empty box interval [{lo}, {hi}]")
        return tuple((float(lo), float(hi)) for lo, hi in box)


@dataclass(frozen=True)
class SampleSet:
    xs: list[Vector]
    ys: list[Vector]
    alphas: list[float]

    def __len__(self):
        return len(self.xs)


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


def _uniform_points(rng, lo, hi, n, radius):
    pts = rng.uniform(lo, hi, size=(n, len(lo)))
    if radius > 0:
        bad = np.linalg.norm(pts, axis=1) < radius
        while bad.any():
            pts[bad] = rng.uniform(lo, hi, size=(int(bad.sum()), len(lo)))
            bad = np.linalg.norm(pts, axis=1) < radius
    return pts


def draw_samples(
    dim: int,
    box: Box,
    cfg: SampleConfig,
    alpha_strategy: str = "uniform01",
    pair_strategy: Optional[str] = None,
    exclude_radius: float = 0.0,
) -> SampleSet:
    """Draw ``cfg.n_samples`` (x, y, alpha) triples inside ``box``."""
    pair_strategy = pair_strategy or cfg.pair_strategy
    n = cfg.n_samples
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    rng = _rng(cfg.seed, dim, PAIR_STRATEGIES.index(pair_strategy))

    xs = _uniform_points(rng, lo, hi, n, exclude_radius)
    if pair_strategy == "independent":
        ys = _uniform_points(rng, lo, hi, n, exclude_radius)
    else:
        sigma = cfg.sigma if cfg.sigma is not None else 0.1 * float(np.max(hi - lo))
        ys = np.clip(xs + sigma * rng.standard_normal((n, dim)), lo, hi)
        if exclude_radius > 0:
            bad = np.linalg.norm(ys, axis=1) < exclude_radius
            while bad.any():
                ys[bad] = np.clip(
                    xs[bad] + sigma * rng.standard_normal((int(bad.sum()), dim)), lo, hi
                )
                bad = np.linalg.norm(ys, axis=1) < exclude_radius

    if alpha_strategy == "uniform01":
        alphas = rng.uniform(0.0, 1.0, n)
    elif alpha_strategy == "endpoints_plus_uniform":
        pick = rng.random(n)
        base = rng.uniform(0.0, 1.0, n)
        alphas = np.where(pick < ENDPOINT_PROB, 0.0, np.where(pick < 2 * ENDPOINT_PROB, 1.0, base))
    elif alpha_strategy == "near_zero":
        alphas = _NEAR_ZERO[rng.integers(0, len(_NEAR_ZERO), n)]
    else:
        raise ConfigError(f"unknown alpha strategy {alpha_strategy!r}")

    return SampleSet(
        xs=[Vector(r) for r in xs.tolist()],
        ys=[Vector(r) for r in ys.tolist()],
        alphas=[float(a) for a in alphas.tolist()],
    )


def samples_for(f: FunctionHandle, cfg: SampleConfig, cond: Optional[ConditionId] = None,
                pair_strategy: Optional[str] = None) -> SampleSet:
    alpha = cfg.alpha_for(cond) if cond is not None else "uniform01"
    box = cfg.resolve_box(f.dim, f.box)
    return draw_samples(f.dim, box, cfg, alpha, pair_strategy, f.exclude_radius)


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class NoCounterexample:
    n_checked: int
    n_skipped: int
    worst_residual: float
    worst_instance: ConditionInstance

    holds = True


@dataclass(frozen=True)
class Counterexample:
    instance: ConditionInstance
    residual: float
    shrunk_instance: ConditionInstance
    shrunk_residual: float
    n_checked: int
    n_skipped: int

    holds = False


Verdict = Union[NoCounterexample, Counterexample]


def _evaluate(inst: ConditionInstance) -> tuple[float, float]:
    return residual_and_scale(inst)


def falsify(cond, f: FunctionHandle, L: float = 1.0, cfg: Optional[SampleConfig] = None,
            samples: Optional[SampleSet] = None) -> Verdict:
    """Search ``cfg.n_samples`` random instances of ``cond`` for a violation.

    All samples are evaluated; the violator with the largest residual is
    shrunk and returned. Samples that cannot be evaluated (outside the domain,
    too close to the boundary for finite differences) are skipped; more than
    half skipped is a configuration error.
    """
    cfg = cfg or SampleConfig()
    cond = ConditionId(cond)
    tol = cfg.tolerance
    if not cond.uses_L:
        L = 1.0
    elif not (L > 0 and math.isfinite(L)):
        raise RangeError(f"{cond}: L must be finite and > 0, got {L!r}")
    if samples is None:
        samples = samples_for(f, cfg, cond)

    needs_alpha = cond.needs_alpha
    worst_r, worst_inst = -math.inf, None
    viol_r, viol_inst = -math.inf, None
    skipped = 0
    for x, y, a in zip(samples.xs, samples.ys, samples.alphas):
        inst = ConditionInstance(cond, f, x, y, L, a if needs_alpha else None)
        try:
            r, s = _evaluate(inst)
        except _SKIPPABLE:
            skipped += 1
            continue
        if r > worst_r:
            worst_r, worst_inst = r, inst
        if not tol.accept(r, s) and r > viol_r:
            viol_r, viol_inst = r, inst

    n = len(samples)
    if skipped * 2 > n:
        raise ConfigError(f"{cond} on {f.name}: {skipped} of {n} samples could not be evaluated")
    if skipped:
        log.info("%s on %s: skipped %d of %d samples", cond, f.name, skipped, n)

    if viol_inst is None:
        return NoCounterexample(n - skipped, skipped, worst_r, worst_inst)
    shrunk = shrink(cond, f, L, viol_inst, tol)
    return Counterexample(viol_inst, viol_r, shrunk, _evaluate(shrunk)[0], n - skipped, skipped)


# --------------------------------------------------------------- shrinking


def _violates(inst: ConditionInstance, tol: ToleranceMode) -> bool:
    r = inst.f.exclude_radius
    if r > 0 and (eu_norm(inst.x) < r or eu_norm(inst.y) < r):
        return False
    try:
        res, scale = _evaluate(inst)
    except _SKIPPABLE:
        return False
    return not tol.accept(res, scale)


_STEP_FRACTIONS = (1.0, 0.5, 0.25, 0.125)


def _candidates(inst: ConditionInstance, center: Vector):
    a = inst.alpha
    if inst.cond.needs_alpha and a not in (0.0, 0.5, 1.0):
        yield inst.with_points(inst.x, inst.y, 0.5)
        yield inst.with_points(inst.x, inst.y, float(round(a)))
    for which in ("x", "y"):
        v = getattr(inst, which)
        for i, (c, m) in enumerate(zip(v.coords, center.coords)):
            if c == m:
                continue
            for t in _STEP_FRACTIONS:
                moved = list(v.coords)
                moved[i] = m if t == 1.0 else c + t * (m - c)
                if moved[i] == c:
                    continue
                w = Vector(moved)
                yield inst.with_points(w, inst.y) if which == "x" else inst.with_points(inst.x, w)


def shrink(cond, f: FunctionHandle, L: float, instance: ConditionInstance,
           tol: Optional[ToleranceMode] = None, center: Optional[Vector] = None,
           max_steps: int = MAX_SHRINK_STEPS) -> ConditionInstance:
    """Greedily move a violating instance toward ``center`` (default: box center).

    Each step accepts the first candidate that still violates: alpha snapped to
    1/2 or the nearest endpoint, or one coordinate snapped to the center or
    moved 1/2, 1/4 or 1/8 of the way there. Returns the input unchanged when it
    does not violate or nothing can be shrunk.
    """
    tol = tol or ToleranceMode()
    cond = ConditionId(cond)
    if instance.cond is not cond or instance.f is not f or (cond.uses_L and instance.L != L):
        instance = ConditionInstance(cond, f, instance.x, instance.y, L, instance.alpha)
    if center is None:
        center = Vector([(lo + hi) / 2.0 for lo, hi in f.box])
    if not _violates(instance, tol):
        return instance
    current = instance
    for _ in range(max_steps):
        for cand in _candidates(current, center):
            if _violates(cand, tol):
                current = cand
                break
        else:
            break
    return current


# ------------------------------------------------------------------ suites


@dataclass
class SuiteResult:
    """Outcome of one universally quantified check over sampled tuples.

    ``worst_gap`` is the largest violation magnitude seen, normalized by the
    magnitude of the compared quantities where the check says so.
    """

    name: str
    description: str
    passed: bool
    n_checked: int
    worst_gap: float
    worst_case: dict = field(default_factory=dict)
    n_inapplicable: int = 0


class _Worst:
    def __init__(self, name, description):
        self.name = name
        self.description = description
        self.gap = 0.0
        self.case: dict = {}
        self.n = 0
        self.failed = False

    def see(self, gap, bound, **case):
        self.n += 1
        if gap > bound:
            self.failed = True
        if gap > self.gap or not self.case:
            self.gap = max(gap, self.gap)
            self.case = {k: (v.tolist() if isinstance(v, Vector) else v) for k, v in case.items()}

    def result(self) -> SuiteResult:
        return SuiteResult(self.name, self.description, not self.failed, self.n, self.gap, self.case)


def axiom_suite(cfg: Optional[SampleConfig] = None, dims: Sequence[int] = AXIOM_DIMS,
                box: tuple[float, float] = (-10.0, 10.0)) -> list[SuiteResult]:
    """Inner-product and metric axioms plus Cauchy-Schwarz on random tuples.

    Every gap is divided by ``max(1, |lhs|, |rhs|)`` and must stay at or below
    ``cfg.tolerance.abs_tol``. Returns the eight axiom checks followed by two
    derived consistency checks.
    """
    cfg = cfg or SampleConfig()
    bound = cfg.tolerance.abs_tol
    checks = {
        "scalar_mult": _Worst("scalar_mult", "a<u,v> = <au,v>"),
        "additivity": _Worst("additivity", "<u+v,w> = <u,w> + <v,w>"),
        "symmetry": _Worst("symmetry", "<u,v> = <v,u>"),
        "positivity": _Worst("positivity", "<u,u> >= 0, zero iff u = 0"),
        "cauchy_schwarz": _Worst("cauchy_schwarz", "|<u,v>| <= |u||v|, equality for v = cu"),
        "definiteness": _Worst("definiteness", "d(x,y) = 0 iff x = y"),
        "metric_symmetry": _Worst("metric_symmetry", "d(x,y) = d(y,x)"),
        "triangle": _Worst("triangle", "d(x,y) <= d(x,z) + d(z,y)"),
        "metric_nonneg": _Worst("metric_nonneg", "d(x,y) >= 0"),
        "square_consistency": _Worst("square_consistency", "norm_sq = eu_norm^2, metric_sq = eu_metric^2"),
    }
    lo, hi = box
    for dim in dims:
        rng = _rng(cfg.seed, dim, 7)
        n = cfg.n_samples
        U = rng.uniform(lo, hi, (n, dim)).tolist()
        V = rng.uniform(lo, hi, (n, dim)).tolist()
        W = rng.uniform(lo, hi, (n, dim)).tolist()
        A = rng.uniform(lo, hi, n).tolist()
        C = rng.uniform(lo, hi, n).tolist()
        zero = Vector([0.0] * dim)
        if norm_sq(zero) != 0.0 or eu_metric(zero, zero) != 0.0:
            checks["positivity"].see(math.inf, bound, u=zero)
        for u, v, w, a, c in zip(U, V, W, A, C):
            u, v, w = Vector(u), Vector(v), Vector(w)

            lhs, rhs = dot(scalar_mul(a, u), v), a * dot(u, v)
            checks["scalar_mult"].see(abs(lhs - rhs) / side_scale(lhs, rhs), bound, u=u, v=v, a=a)

            lhs = dot(vec_add(u, v), w)
            rhs = dot(u, w) + dot(v, w)
            checks["additivity"].see(abs(lhs - rhs) / side_scale(lhs, rhs), bound, u=u, v=v, w=w)

            uv, vu = dot(u, v), dot(v, u)
            checks["symmetry"].see(abs(uv - vu) / side_scale(uv, vu), bound, u=u, v=v)

            uu = dot(u, u)
            pos_gap = max(0.0, -uu) + (math.inf if uu == 0.0 and u != zero else 0.0)
            checks["positivity"].see(pos_gap, bound, u=u)

            nu, nv = eu_norm(u), eu_norm(v)
            cs = cauchy_schwarz_gap(u, v)
            gap = max(0.0, -cs) / side_scale(abs(uv), nu * nv)
            cu = scalar_mul(c, u)
            eq = abs(cauchy_schwarz_gap(u, cu)) / side_scale(abs(dot(u, cu)), nu * eu_norm(cu))
            checks["cauchy_schwarz"].see(max(gap, eq), bound, u=u, v=v, c=c)

            dxy, dyx, dxx = eu_metric(u, v), eu_metric(v, u), eu_metric(u, u)
            defn = dxx + (math.inf if dxy == 0.0 and u != v else 0.0)
            checks["definiteness"].see(defn, bound, x=u, y=v)
            checks["metric_symmetry"].see(abs(dxy - dyx) / side_scale(dxy, dyx), bound, x=u, y=v)

            via = eu_metric(u, w) + eu_metric(w, v)
            checks["triangle"].see(max(0.0, dxy - via) / side_scale(dxy, via), bound, x=u, y=v, z=w)
            checks["metric_nonneg"].see(max(0.0, -dxy), bound, x=u, y=v)

            ns, en = norm_sq(u), eu_norm(u)
            ms, em = metric_sq(u, v), eu_metric(u, v)
            sq_gap = max(abs(ns - en * en) / side_scale(ns, en * en),
                         abs(ms - em * em) / side_scale(ms, em * em))
            checks["square_consistency"].see(sq_gap, bound, u=u, v=v)
    return [c.result() for c in checks.values()]


def identity_suite(cfg: Optional[SampleConfig] = None, lemma_dim: int = 3,
                   box: tuple[float, float] = (-10.0, 10.0)) -> list[SuiteResult]:
    """The x^2 convexity identity (|gap| <= abs_tol) and the weighted norm lemma
    (gap >= -abs_tol), each over ``cfg.n_samples`` random instances."""
    cfg = cfg or SampleConfig()
    bound = cfg.tolerance.abs_tol
    lo, hi = box
    n = cfg.n_samples

    rng = _rng(cfg.seed, 1, 14)
    X, Y = rng.uniform(lo, hi, n).tolist(), rng.uniform(lo, hi, n).tolist()
    A = rng.uniform(0.0, 1.0, n).tolist()
    sq = _Worst("square_identity", "a x^2 + (1-a) y^2 - (a x + (1-a) y)^2 = a(1-a)(x-y)^2")
    for x, y, a in zip(X, Y, A):
        sq.see(abs(square_identity_gap(x, y, a)), bound, x=x, y=y, a=a)

    rng = _rng(cfg.seed, lemma_dim, 16)
    P = rng.uniform(lo, hi, (n, lemma_dim)).tolist()
    Q = rng.uniform(lo, hi, (n, lemma_dim)).tolist()
    A = rng.uniform(0.0, 1.0, n).tolist()
    lemma = _Worst("norm_lemma", "a(1-a)|x-y|^2 <= a|x|^2 + (1-a)|y|^2")
    for p, q, a in zip(P, Q, A):
        x, y = Vector(p), Vector(q)
        lemma.see(max(0.0, -norm_lemma_gap(x, y, a)), bound, x=x, y=y, a=a)
    return [sq.result(), lemma.result()]


def chain_suite(f: FunctionHandle, L: float, cfg: Optional[SampleConfig] = None) -> SuiteResult:
    """Both links of ``L|x-y|^2 >= |dg||dx| >= <dg, dx>`` on pairs where the
    gradient Lipschitz bound holds; other pairs count as inapplicable."""
    cfg = cfg or SampleConfig()
    tol = cfg.tolerance
    samples = samples_for(f, cfg)
    w = _Worst("lipschitz_chain", "L|x-y|^2 >= |g(x)-g(y)||x-y| >= <g(x)-g(y), x-y>")
    inapplicable = 0
    for x, y in zip(samples.xs, samples.ys):
        try:
            first, second = chain_0_implies_4_gap(f, L, x, y, tol)
        except InapplicableInstance:
            inapplicable += 1
            continue
        except _SKIPPABLE:
            continue
        scale = max(1.0, L * metric_sq(x, y))
        gap = max(0.0, -first, -second)
        w.see(gap, tol.bound(scale), x=x, y=y)
    res = w.result()
    res.n_inapplicable = inapplicable
    return res


def check_compose_assumptions(h: FunctionHandle, cfg: Optional[SampleConfig] = None) -> dict:
    """Spot-check that a 1-D outer function is convex and nondecreasing on its box."""
    cfg = cfg or SampleConfig()
    if h.dim != 1:
        raise ConfigError(f"{h.name} is not one-dimensional")
    convex = falsify(ConditionId.CONVEX0, h, 1.0, cfg)
    samples = samples_for(h, cfg)
    mono = _Worst("monotone", "s <= t implies h(s) <= h(t)")
    tol = cfg.tolerance
    for x, y in zip(samples.xs, samples.ys):
        s, t = sorted((x[0], y[0]))
        hs, ht = h.eval(Vector([s])), h.eval(Vector([t]))
        mono.see(hs - ht, tol.bound(side_scale(hs, ht)), s=s, t=t)
    return {"convex": convex, "monotone": mono.result()}
