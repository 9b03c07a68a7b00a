"""Exit criteria. Each test carries a ``criterion`` marker; a PASS/FAIL line
per criterion is printed in the terminal summary."""
import json
import time
from itertools import combinations_with_replacement

import numpy as np
import pytest

from convexcert import cli, funcs
from convexcert.checker import Counterexample, SampleConfig, axiom_suite, falsify, identity_suite
from convexcert.conditions import NESTEROV, ConditionId, sides
from convexcert.estimate import equivalence_L, equivalence_report, estimate_L, minimal_L
from convexcert.vecspace import Vector, eu_norm

from test_estimate import axis_pair_oracle

pytestmark = pytest.mark.acceptance
C = ConditionId
CFG = SampleConfig(seed=0, n_samples=10_000)


def violates(inst):
    lhs, rhs = sides(inst)
    return lhs - rhs > 1e-9 + 1e-7 * max(1.0, abs(lhs), abs(rhs))


@pytest.mark.criterion(1, "axiom suite over 1e4 tuples in dims 1,2,3,5,10, gap <= 1e-9, < 5 s")
def test_axiom_suite():
    start = time.perf_counter()
    results = axiom_suite(CFG)
    elapsed = time.perf_counter() - start
    assert len(results) >= 8
    for r in results:
        assert r.passed and r.worst_gap <= 1e-9, (r.name, r.worst_gap, r.worst_case)
    assert elapsed < 5.0, f"axiom suite took {elapsed:.2f} s"


@pytest.mark.criterion(2, "square identity |gap| <= 1e-9 and norm lemma gap >= -1e-9 over 1e4")
def test_identity_suite():
    sq, lemma = identity_suite(CFG, lemma_dim=3)
    assert sq.n_checked == 10_000 and sq.worst_gap <= 1e-9
    assert lemma.n_checked == 10_000 and lemma.worst_gap <= 1e-9  # worst of max(0, -gap)


def _catalog():
    return [
        funcs.square(), funcs.square_pos(), funcs.quartic1d(),
        funcs.eu_norm_fn(3), funcs.norm_sq_fn(3), funcs.neg_norm_sq(3), funcs.const_c(3),
        funcs.affine([0.5, -2.0, 3.0], 4.0), funcs.diag_quadratic([1.0, 5.0, 0.25]),
    ]


@pytest.mark.criterion(3, "analytic vs central FD gradient, rel err <= 1e-6, 100 points per entry")
def test_gradient_oracle():
    rng = np.random.default_rng(2024)
    for f in _catalog():
        n = 0
        while n < 100:
            p = rng.uniform(-9.99, 9.99, f.dim)
            if f.exclude_radius and np.linalg.norm(p) < 0.1:
                continue
            x = Vector(p.tolist())
            g, fd = f.grad(x), f.fd_grad(x)
            err = max(abs(a - b) for a, b in zip(g, fd)) / (1.0 + eu_norm(g))
            assert err <= 1e-6, (f.name, x, err)
            n += 1


@pytest.mark.criterion(4, "norm2: seven conditions hold at L=2, nest0 falsified at L=1.9, < 10 s")
def test_quadratic_tightness():
    f = funcs.norm_sq_fn(2)
    start = time.perf_counter()
    verdicts = {c: falsify(c, f, 2.0, CFG) for c in NESTEROV}
    low = falsify(C.NEST0, f, 1.9, CFG)
    elapsed = time.perf_counter() - start
    for c, v in verdicts.items():
        assert v.holds and v.n_checked == 10_000, c
        assert not violates(v.worst_instance)
    assert isinstance(low, Counterexample)
    assert violates(low.shrunk_instance)
    lhs, rhs = sides(low.shrunk_instance)
    assert lhs - rhs == low.shrunk_residual
    assert elapsed < 10.0, f"took {elapsed:.2f} s"


@pytest.mark.criterion(5, "minimal_L(nest0, norm2) = 2 +- 0.02; L_hat(norm2) = 2 +- 1e-6; L_hat(diagq(1,5)) >= 9.5")
def test_lipschitz_estimates():
    norm2 = funcs.norm_sq_fn(2)
    assert abs(minimal_L(C.NEST0, norm2, CFG) - 2.0) <= 0.02
    assert abs(estimate_L(norm2, CFG).L_hat - 2.0) <= 1e-6
    exact = float(axis_pair_oracle([1, 5], [-10, -2.5, 0, 1, 10]) ** 0.5)
    assert exact == 10.0
    dq = estimate_L(funcs.diag_quadratic([1.0, 5.0]), CFG).L_hat
    assert 9.5 <= dq <= exact + 1e-9


def _equivalence_family():
    n1, n2, n3 = funcs.norm_sq_fn(1), funcs.norm_sq_fn(2), funcs.norm_sq_fn(3)
    dq = funcs.diag_quadratic([1.0, 5.0])
    aff = funcs.affine([0.5, -2.0], 4.0)
    const = funcs.const_c(2)
    return [
        n1, n2, n3, dq, aff, const,
        funcs.scale(0.5, dq),
        funcs.scale(3.0, n2),
        funcs.fn_sum(n2, dq),
        funcs.fn_sum(aff, const),
        funcs.scale(2.0, funcs.fn_sum(n2, dq)),
        funcs.fn_sum(funcs.scale(0.25, aff), dq),
    ]


@pytest.mark.criterion(6, "zero DAG discrepancies at 1.05 L_hat; neg_norm2 flags the convexity gate")
def test_equivalence_consistency():
    for f in _equivalence_family():
        L = equivalence_L(estimate_L(f, CFG))
        r = equivalence_report(f, L, CFG)
        assert not r.discrepancies, (f.name, r.summary())
        assert r.convexity_gate_passed, f.name
        assert r.summary() == "all seven agree: holds", (f.name, r.summary())
    neg = funcs.neg_norm_sq(2)
    r = equivalence_report(neg, equivalence_L(estimate_L(neg, CFG)), CFG)
    assert isinstance(r.convexity, Counterexample)
    assert not r.convexity_gate_passed and not r.equivalence_verified
    assert "convexity gate FAILED" in r.summary()


@pytest.mark.criterion(7, "quartic at L=2: nest0 falsified within 1e3 samples, shrunk |x| <= 1")
def test_quartic_control():
    q = funcs.quartic1d()
    assert q.box == ((-10.0, 10.0),)
    v = falsify(C.NEST0, q, 2.0, CFG.with_(n_samples=1000))
    assert isinstance(v, Counterexample)
    s = v.shrunk_instance
    assert abs(s.x[0]) <= 1.0 and abs(s.x[0]) <= abs(v.instance.x[0])
    assert violates(s)


def _convex_entries():
    return [funcs.eu_norm_fn(2), funcs.norm_sq_fn(2), funcs.const_c(2),
            funcs.affine([0.5, -2.0], 4.0), funcs.diag_quadratic([1.0, 5.0])]


@pytest.mark.criterion(8, "convex0 holds for scale(a,f), f+g and compose(sqpos, norm) over 1e4")
def test_convexity_combinators():
    entries = _convex_entries()
    for f in entries:
        for a in (0.0, 0.5, 3.0):
            assert falsify(C.CONVEX0, funcs.scale(a, f), cfg=CFG).holds, (a, f.name)
    for f, g in combinations_with_replacement(entries, 2):
        assert falsify(C.CONVEX0, funcs.fn_sum(f, g), cfg=CFG).holds, (f.name, g.name)
    comp = funcs.compose_mono(funcs.square_pos(), funcs.eu_norm_fn(2))
    assert falsify(C.CONVEX0, comp, cfg=CFG).holds


COMMANDS = [
    ["axioms"],
    ["identities"],
    ["check", "--fn", "neg_norm2", "--dim", "2", "--cond", "convex0"],
    ["check", "--fn", "quartic", "--cond", "nest0", "--L", "2"],
    ["check", "--fn", "norm2", "--dim", "2", "--cond", "nest5", "--L", "1.5"],
    ["estimate", "--fn", "diagq(1,5)"],
    ["equiv", "--fn", "norm2", "--dim", "2", "--L", "1"],
    ["equiv", "--fn", "neg_norm2", "--dim", "2", "--L", "2"],
]


@pytest.mark.criterion(9, "same seed gives byte-identical JSON modulo timing; replay re-verifies")
def test_determinism_and_replay(tmp_path):
    n_replayed = 0
    for i, argv in enumerate(COMMANDS):
        texts = []
        for run in ("a", "b"):
            out = tmp_path / f"{i}{run}.json"
            cli.main([*argv, "--seed", "17", "--samples", "2000", "--json", "--out", str(out)])
            texts.append([ln for ln in out.read_text().splitlines() if "wall_seconds" not in ln])
        assert texts[0] == texts[1], argv
        doc = json.loads((tmp_path / f"{i}a.json").read_text())
        has_cex = any(c.get("counterexample") for c in doc.get("checks") or []) or any(
            c.get("counterexample") for c in (doc.get("dag") or {}).get("verdicts", []))
        if not has_cex:
            continue
        out = tmp_path / f"{i}replay.json"
        code = cli.main(["check", "--replay", str(tmp_path / f"{i}a.json"), "--json", "--out", str(out)])
        rows = json.loads(out.read_text())["replay"]["rows"]
        assert code == 0 and rows, argv
        assert all(r["match"] for r in rows)
        n_replayed += len(rows)
    assert n_replayed > 0
