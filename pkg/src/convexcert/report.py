"""JSON report document: serialization of verdicts and counterexample replay.

Floats are written with 17 significant digits so every stored coordinate
parses back to the identical double. The only field allowed to differ
between two runs of the same command is ``timing``.
"""
from __future__ import annotations

import json
import math
from typing import Any, Optional

from .checker import Counterexample, SampleConfig, SuiteResult, Verdict
from .conditions import ConditionId, ConditionInstance, residual_and_scale
from .estimate import DagReport, LEstimate, LSearch
from .funcs import FunctionHandle
from .tolerance import ToleranceMode
from .vecspace import Vector

SCHEMA_VERSION = 1
REPLAY_ULPS = 4


# ------------------------------------------------------------------ writing


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """``json.dumps`` with fixed 17-significant-digit floats."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def instance_to_dict(inst: ConditionInstance) -> dict:
    return {
        "cond": inst.cond.value,
        "L": inst.L if inst.cond.uses_L else None,
        "x": inst.x.tolist(),
        "y": inst.y.tolist(),
        "alpha": inst.alpha,
    }


def instance_from_dict(d: dict, f: FunctionHandle) -> ConditionInstance:
    cond = ConditionId(d["cond"])
    return ConditionInstance(
        cond, f, Vector(d["x"]), Vector(d["y"]),
        float(d["L"]) if d.get("L") is not None else 1.0,
        float(d["alpha"]) if d.get("alpha") is not None else None,
    )


def verdict_to_dict(cond: ConditionId, L: Optional[float], v: Verdict) -> dict:
    out = {
        "condition": cond.value,
        "L": L if cond.uses_L else None,
        "verdict": "holds" if v.holds else "falsified",
        "n_checked": v.n_checked,
        "n_skipped": v.n_skipped,
    }
    if isinstance(v, Counterexample):
        out["worst_residual"] = v.residual
        out["worst_instance"] = None
        out["counterexample"] = {
            "instance": instance_to_dict(v.instance),
            "residual": v.residual,
            "shrunk": instance_to_dict(v.shrunk_instance),
            "shrunk_residual": v.shrunk_residual,
        }
    else:
        out["worst_residual"] = v.worst_residual
        out["worst_instance"] = instance_to_dict(v.worst_instance)
        out["counterexample"] = None
    return out


def suite_to_dict(r: SuiteResult) -> dict:
    return {
        "name": r.name,
        "statement": r.description,
        "passed": r.passed,
        "n_checked": r.n_checked,
        "n_inapplicable": r.n_inapplicable,
        "worst_gap": r.worst_gap,
        "worst_case": r.worst_case,
    }


def function_to_dict(f: FunctionHandle) -> dict:
    return {
        "name": f.name,
        "dim": f.dim,
        "box": [list(b) for b in f.box],
        "analytic_gradient": f.has_analytic_grad,
        "claims_convex": f.claims_convex,
        "claims_L_smooth": f.claims_L_smooth,
        "assumptions": list(f.assumptions),
    }


def estimate_to_dict(e: LEstimate) -> dict:
    return {
        "L_hat": e.L_hat,
        "n_pairs": e.n_pairs,
        "argmax_pair": None if e.argmax_pair is None else [p.tolist() for p in e.argmax_pair],
    }


def search_to_dict(s: LSearch) -> dict:
    return {
        "condition": s.cond.value,
        "L_star": s.L_star,
        "bracket": list(s.bracket),
        "probes": s.probes,
        "fresh_seed": s.fresh_seed,
        "fresh_seed_holds": s.fresh_seed_holds,
    }


def dag_to_dict(d: DagReport) -> dict:
    return {
        "L": d.L,
        "verdicts": [verdict_to_dict(c, d.L, v) for c, v in d.verdicts.items()],
        "convexity_gate": verdict_to_dict(ConditionId.CONVEX0, None, d.convexity),
        "edges": [[s.value, t.value] for s, t in d.edges],
        "discrepancies": [[s.value, t.value] for s, t in d.discrepancies],
        "equivalence_verified": d.equivalence_verified,
        "summary": d.summary(),
    }


def config_to_dict(cfg: SampleConfig) -> dict:
    return {
        "seed": cfg.seed,
        "n_samples": cfg.n_samples,
        "alpha_strategy": cfg.alpha_strategy,
        "pair_strategy": cfg.pair_strategy,
        "abs_tol": cfg.tolerance.abs_tol,
        "rel_tol": cfg.tolerance.rel_tol,
    }


# ------------------------------------------------------------------ replay


def iter_check_dicts(doc: dict):
    """Yield ``(path, check_dict)`` for every condition verdict in a report."""
    for i, c in enumerate(doc.get("checks") or []):
        yield f"checks[{i}]", c
    dag = doc.get("dag")
    if dag:
        for i, c in enumerate(dag.get("verdicts") or []):
            yield f"dag.verdicts[{i}]", c
        if dag.get("convexity_gate"):
            yield "dag.convexity_gate", dag["convexity_gate"]


def replay_document(doc: dict, f: FunctionHandle, tol: ToleranceMode) -> list[dict]:
    """Recompute every stored counterexample residual.

    A stored residual matches when the recomputed value is within
    ``REPLAY_ULPS`` ulps of the side magnitude; the shrunk instance must
    also still violate at ``tol``.
    """
    rows = []
    for path, check in iter_check_dicts(doc):
        cex = check.get("counterexample")
        if not cex:
            continue
        for key, rkey in (("instance", "residual"), ("shrunk", "shrunk_residual")):
            inst = instance_from_dict(cex[key], f)
            value, scale = residual_and_scale(inst)
            stored = float(cex[rkey])
            match = abs(value - stored) <= REPLAY_ULPS * math.ulp(scale)
            rows.append({
                "path": f"{path}.{key}",
                "condition": inst.cond.value,
                "stored_residual": stored,
                "recomputed_residual": value,
                "match": match,
                "violates": not tol.accept(value, scale),
            })
    return rows
