"""Gradient Lipschitz constant estimation, minimal-L search, and the
implication-graph consistency report for the seven smoothness conditions."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .checker import (
    Counterexample,
    SampleConfig,
    Verdict,
    _SKIPPABLE,
    falsify,
    samples_for,
)
from .conditions import NESTEROV, ConditionId
from .errors import BracketError, ConfigError, RangeError
from .funcs import FunctionHandle
from .vecspace import Vector, eu_metric

MIN_PAIR_DISTANCE = 1e-9
DEFAULT_BRACKET = (1e-3, 1e3)
BISECTION_REL_WIDTH = 1e-3
EQUIV_MARGIN = 1.05
# used in place of 1.05 * L_hat when the gradient is constant (L_hat == 0)
L_FLOOR = DEFAULT_BRACKET[0]

N = ConditionId
IMPLICATION_EDGES: tuple[tuple[ConditionId, ConditionId], ...] = (
    (N.NEST0, N.NEST4),
    (N.NEST4, N.NEST1),
    (N.NEST1, N.NEST2),
    (N.NEST2, N.NEST3),
    (N.NEST3, N.NEST0),
    (N.NEST1, N.NEST6),
    (N.NEST6, N.NEST1),
    (N.NEST2, N.NEST5),
    (N.NEST5, N.NEST2),
)


@dataclass(frozen=True)
class LEstimate:
    L_hat: float
    n_pairs: int
    argmax_pair: Optional[tuple[Vector, Vector]]


def estimate_L(f: FunctionHandle, cfg: Optional[SampleConfig] = None) -> LEstimate:
    """Largest ``|g(x) - g(y)| / |x - y|`` over independent and nearby pairs."""
    cfg = cfg or SampleConfig()
    best, best_pair, n_pairs = 0.0, None, 0
    for strategy in ("independent", "nearby"):
        samples = samples_for(f, cfg, pair_strategy=strategy)
        for x, y in zip(samples.xs, samples.ys):
            dist = eu_metric(x, y)
            if dist < MIN_PAIR_DISTANCE:
                continue
            try:
                q = eu_metric(f.grad(x), f.grad(y)) / dist
            except _SKIPPABLE:
                continue
            n_pairs += 1
            if q > best or best_pair is None:
                best, best_pair = max(q, best), (x, y)
    if n_pairs == 0:
        raise ConfigError(f"estimate_L on {f.name}: every sampled pair was skipped")
    return LEstimate(best, n_pairs, best_pair)


@dataclass(frozen=True)
class LSearch:
    cond: ConditionId
    L_star: float
    bracket: tuple[float, float]
    probes: int
    fresh_seed: int
    fresh_seed_holds: bool


def minimal_L_search(cond, f: FunctionHandle, cfg: Optional[SampleConfig] = None,
                     bracket: tuple[float, float] = DEFAULT_BRACKET) -> LSearch:
    """Bisect for the smallest L at which ``cond`` survives a fixed sample set.

    One seed is reused for every probe, so "holds at L" is monotone in L. The
    result holds at ``L_star`` and fails at ``L_star * (1 - 1e-3)``. When the
    condition already holds at the lower end, that end is returned. A single
    verification with a different seed is run at the end and reported.
    """
    cfg = cfg or SampleConfig()
    cond = ConditionId(cond)
    if cond not in NESTEROV:
        raise ConfigError(f"minimal L is only defined for nest0..nest6, got {cond}")
    lo, hi = map(float, bracket)
    if not (0 < lo < hi and math.isfinite(hi)):
        raise BracketError(f"invalid bracket ({lo}, {hi})")
    samples = samples_for(f, cfg, cond)

    def holds(L):
        return falsify(cond, f, L, cfg, samples=samples).holds

    probes = 1
    if not holds(hi):
        raise BracketError(f"{cond} on {f.name} fails at the upper end L = {hi}")
    probes += 1
    if holds(lo):
        L_star = lo
    else:
        while hi - lo > BISECTION_REL_WIDTH * hi:
            mid = 0.5 * (lo + hi)
            probes += 1
            if holds(mid):
                hi = mid
            else:
                lo = mid
        L_star = hi
    fresh = (cfg.seed + 1) % 2**64
    verified = falsify(cond, f, L_star, cfg.with_(seed=fresh)).holds
    return LSearch(cond, L_star, (float(bracket[0]), float(bracket[1])), probes, fresh, verified)


def minimal_L(cond, f: FunctionHandle, cfg: Optional[SampleConfig] = None,
              bracket: tuple[float, float] = DEFAULT_BRACKET) -> float:
    return minimal_L_search(cond, f, cfg, bracket).L_star


def equivalence_L(estimate: LEstimate) -> float:
    return max(EQUIV_MARGIN * estimate.L_hat, L_FLOOR)


@dataclass
class DagReport:
    L: float
    verdicts: dict[ConditionId, Verdict]
    convexity: Verdict
    edges: tuple[tuple[ConditionId, ConditionId], ...] = IMPLICATION_EDGES
    discrepancies: list[tuple[ConditionId, ConditionId]] = field(default_factory=list)

    @property
    def convexity_gate_passed(self) -> bool:
        return self.convexity.holds

    @property
    def all_hold(self) -> bool:
        return all(v.holds for v in self.verdicts.values())

    @property
    def all_falsified(self) -> bool:
        return not any(v.holds for v in self.verdicts.values())

    @property
    def equivalence_verified(self) -> bool:
        """All seven agree, and the convexity hypothesis survived sampling."""
        return self.convexity_gate_passed and not self.discrepancies and (
            self.all_hold or self.all_falsified)

    def summary(self) -> str:
        if self.discrepancies:
            parts = []
            for src, dst in self.discrepancies:
                v = self.verdicts[dst]
                parts.append(f"{src}->{dst} (target residual {v.residual!r})")
            line = "discrepancies: " + "; ".join(parts)
        elif self.all_hold:
            line = "all seven agree: holds"
        elif self.all_falsified:
            line = "all seven agree: falsified"
        else:
            held = ", ".join(str(c) for c, v in self.verdicts.items() if v.holds)
            line = f"no edge discrepancies; mixed verdicts (holding: {held})"
        if not self.convexity_gate_passed:
            line += "; convexity gate FAILED (convex0 falsified), equivalence not applicable"
        return line


def equivalence_report(f: FunctionHandle, L: float, cfg: Optional[SampleConfig] = None) -> DagReport:
    """Evaluate all seven conditions at ``L`` and localize disagreements on the
    implication graph. ``convex0`` is checked as a gate alongside."""
    if not (L > 0 and math.isfinite(L)):
        raise RangeError(f"L must be finite and > 0, got {L!r}")
    cfg = cfg or SampleConfig()
    verdicts = {c: falsify(c, f, L, cfg) for c in NESTEROV}
    gate = falsify(ConditionId.CONVEX0, f, L, cfg)
    report = DagReport(L=L, verdicts=verdicts, convexity=gate)
    report.discrepancies = [
        (s, t) for s, t in IMPLICATION_EDGES
        if verdicts[s].holds and isinstance(verdicts[t], Counterexample)
    ]
    return report
