"""Command-line front end.

Exit codes: 0 when every requested check passed, 1 when a counterexample was
found (the report is still written), 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional

from . import __version__
from .checker import (
    SampleConfig,
    axiom_suite,
    chain_suite,
    check_compose_assumptions,
    falsify,
    identity_suite,
    ALPHA_STRATEGIES,
    PAIR_STRATEGIES,
)
from .conditions import ConditionId
from .errors import CertError
from .estimate import (
    DEFAULT_BRACKET,
    equivalence_L,
    equivalence_report,
    estimate_L,
    minimal_L_search,
)
from .fnspec import build_node, compose_nodes, parse_fn_spec, parse_tree
from .funcs import FunctionHandle, with_box
from .report import (
    SCHEMA_VERSION,
    config_to_dict,
    dag_to_dict,
    dumps,
    estimate_to_dict,
    function_to_dict,
    replay_document,
    search_to_dict,
    suite_to_dict,
    verdict_to_dict,
)
from .tolerance import ToleranceMode

COMMANDS = ("axioms", "check", "estimate", "equiv", "identities")
EXIT_OK, EXIT_COUNTEREXAMPLE, EXIT_USAGE = 0, 1, 2
L_AGREEMENT = 0.02
IDENTITIES_DEFAULT_FN = ("norm2", 3)


class UsageError(CertError):
    pass


@dataclass
class RunSpec:
    command: str
    fn_spec: Optional[str] = None
    dim: Optional[int] = None
    cond: Optional[str] = None
    L: Optional[float] = None
    seed: int = 0
    n_samples: int = 10_000
    box: Optional[tuple[float, float]] = None
    alpha_strategy: Optional[str] = None
    pair_strategy: str = "independent"
    abs_tol: float = 1e-9
    rel_tol: float = 1e-7
    bracket: Optional[tuple[float, float]] = None
    output: str = "text"
    output_path: Optional[str] = None
    replay: Optional[str] = None

    def config(self) -> SampleConfig:
        return SampleConfig(
            seed=self.seed,
            n_samples=self.n_samples,
            alpha_strategy=self.alpha_strategy,
            pair_strategy=self.pair_strategy,
            tolerance=ToleranceMode(self.abs_tol, self.rel_tol),
        )

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output_path")
        for k in ("box", "bracket"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d


def _interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty interval {text!r}")
    return lo, hi


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fn", dest="fn_spec", help="function spec, e.g. 'sum(norm2, diagq(1,5))'")
    common.add_argument("--dim", type=int)
    common.add_argument("--cond", help="nest0..nest6, convex0, convex1")
    common.add_argument("--L", type=float, dest="L")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--samples", type=int, dest="n_samples", default=10_000)
    common.add_argument("--box", type=_interval, help="lo:hi applied to every coordinate")
    common.add_argument("--alpha-strategy", choices=ALPHA_STRATEGIES)
    common.add_argument("--pair-strategy", choices=PAIR_STRATEGIES, default="independent")
    common.add_argument("--abs-tol", type=float, default=1e-9)
    common.add_argument("--rel-tol", type=float, default=1e-7)
    common.add_argument("--bracket", type=_interval, help="lo:hi for the minimal-L search")
    common.add_argument("--json", action="store_const", const="json", dest="output", default="text")
    common.add_argument("--out", dest="output_path")
    common.add_argument("--replay", help="re-verify counterexamples stored in a JSON report")

    parser = argparse.ArgumentParser(
        prog="convexcert",
        description="Sample-based certification of convexity and gradient-smoothness inequalities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "axioms": "inner-product and metric axioms, Cauchy-Schwarz",
        "check": "falsify one condition for one function",
        "estimate": "estimate the gradient Lipschitz constant",
        "equiv": "all seven smoothness conditions and their implication graph",
        "identities": "x^2 convexity identity, weighted norm lemma, Lipschitz chain",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def _function(spec: RunSpec, default: Optional[tuple[str, int]] = None) -> FunctionHandle:
    text, dim = spec.fn_spec, spec.dim
    if text is None:
        if default is None:
            raise UsageError(f"{spec.command} requires --fn")
        text, dim = default[0], dim or default[1]
    f = parse_fn_spec(text, dim)
    if spec.box is not None:
        f = with_box(f, [spec.box] * f.dim)
    return f


def _need_L(spec: RunSpec, cond: ConditionId) -> float:
    if spec.L is None:
        raise UsageError(f"{cond} needs --L")
    if not spec.L > 0:
        raise UsageError(f"--L must be > 0, got {spec.L}")
    return spec.L


def _cmd_axioms(spec, doc):
    results = axiom_suite(spec.config())
    doc["suites"] = [suite_to_dict(r) for r in results]
    return EXIT_OK if all(r.passed for r in results) else EXIT_COUNTEREXAMPLE


def _cmd_identities(spec, doc):
    cfg = spec.config()
    results = identity_suite(cfg)
    f = _function(spec, IDENTITIES_DEFAULT_FN)
    doc["function"] = function_to_dict(f)
    if spec.L is not None:
        L = _need_L(spec, ConditionId.NEST0)
    elif f.claims_L_smooth:
        L = f.claims_L_smooth
    else:
        L = equivalence_L(estimate_L(f, cfg))
    results.append(chain_suite(f, L, cfg))
    doc["suites"] = [suite_to_dict(r) for r in results]
    doc["L"] = L
    return EXIT_OK if all(r.passed for r in results) else EXIT_COUNTEREXAMPLE


def _cmd_check(spec, doc):
    if spec.replay:
        return _cmd_replay(spec, doc)
    if spec.cond is None:
        raise UsageError("check requires --cond")
    cond = ConditionId.parse(spec.cond)
    f = _function(spec)
    doc["function"] = function_to_dict(f)
    L = _need_L(spec, cond) if cond.uses_L else None
    v = falsify(cond, f, L or 1.0, spec.config())
    doc["checks"] = [verdict_to_dict(cond, L, v)]
    checked = []
    for node in compose_nodes(parse_tree(spec.fn_spec)):
        outer = build_node(node.outer, 1, spec.fn_spec)
        pre = check_compose_assumptions(outer, spec.config())
        checked.append({
            "outer": outer.name,
            "convex": verdict_to_dict(ConditionId.CONVEX0, None, pre["convex"]),
            "monotone": suite_to_dict(pre["monotone"]),
        })
    if checked:
        doc["compose_assumptions"] = checked
    return EXIT_OK if v.holds else EXIT_COUNTEREXAMPLE


def _cmd_estimate(spec, doc):
    cfg = spec.config()
    f = _function(spec)
    doc["function"] = function_to_dict(f)
    est = estimate_L(f, cfg)
    doc["estimate"] = estimate_to_dict(est)
    bracket = spec.bracket or (DEFAULT_BRACKET[0], max(DEFAULT_BRACKET[1], 2.0 * est.L_hat))
    search = minimal_L_search(ConditionId.NEST0, f, cfg, bracket)
    doc["minimal_L"] = search_to_dict(search)
    agree = None
    if est.L_hat > 0:
        agree = abs(search.L_star - est.L_hat) <= L_AGREEMENT * est.L_hat
    doc["estimates_agree"] = agree
    return EXIT_OK


def _cmd_equiv(spec, doc):
    cfg = spec.config()
    f = _function(spec)
    doc["function"] = function_to_dict(f)
    if spec.L is not None:
        L = _need_L(spec, ConditionId.NEST0)
    else:
        est = estimate_L(f, cfg)
        doc["estimate"] = estimate_to_dict(est)
        L = equivalence_L(est)
    dag = equivalence_report(f, L, cfg)
    doc["dag"] = dag_to_dict(dag)
    return EXIT_OK if dag.all_hold and dag.convexity_gate_passed else EXIT_COUNTEREXAMPLE


def _cmd_replay(spec, doc):
    try:
        with open(spec.replay) as fh:
            stored = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read report {spec.replay!r}: {exc}") from None
    rs = stored.get("run_spec") or {}
    if not rs.get("fn_spec"):
        raise UsageError("report has no function spec to replay against")
    box = tuple(rs["box"]) if rs.get("box") else None
    f = parse_fn_spec(rs["fn_spec"], rs.get("dim"))
    if box is not None:
        f = with_box(f, [box] * f.dim)
    tol = ToleranceMode(rs.get("abs_tol", 1e-9), rs.get("rel_tol", 1e-7))
    rows = replay_document(stored, f, tol)
    doc["replay"] = {"source": spec.replay, "n_counterexamples": len(rows) // 2, "rows": rows}
    ok = all(r["match"] and (r["violates"] or not r["path"].endswith(".shrunk")) for r in rows)
    return EXIT_OK if ok else EXIT_COUNTEREXAMPLE


HANDLERS = {
    "axioms": _cmd_axioms,
    "identities": _cmd_identities,
    "check": _cmd_check,
    "estimate": _cmd_estimate,
    "equiv": _cmd_equiv,
}


def run(spec: RunSpec) -> tuple[int, dict]:
    doc = {
        "tool": "convexcert",
        "tool_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "run_spec": spec.echo(),
    }
    started = time.perf_counter()
    try:
        doc["config"] = config_to_dict(spec.config())
        code = HANDLERS[spec.command](spec, doc)
        doc["errors"] = []
    except (CertError, ValueError) as exc:
        code = EXIT_USAGE
        doc["errors"] = [{"type": type(exc).__name__, "message": str(exc)}]
    doc["exit_code"] = code
    doc["status"] = {EXIT_OK: "passed", EXIT_COUNTEREXAMPLE: "counterexample", EXIT_USAGE: "error"}[code]
    doc["timing"] = {"wall_seconds": time.perf_counter() - started}
    return code, doc


def _text_verdict(c: dict) -> str:
    L = "" if c["L"] is None else f" at L={c['L']!r}"
    line = f"{c['condition']}{L}: {c['verdict'].upper()} ({c['n_checked']} checked, {c['n_skipped']} skipped)"
    if c["counterexample"]:
        s = c["counterexample"]["shrunk"]
        alpha = "" if s["alpha"] is None else f" alpha={s['alpha']!r}"
        line += (f"\n    residual {c['counterexample']['residual']!r}; shrunk x={s['x']} y={s['y']}"
                 f"{alpha} residual {c['counterexample']['shrunk_residual']!r}")
    else:
        line += f", worst residual {c['worst_residual']!r}"
    return line


def render_text(doc: dict) -> str:
    lines = [f"convexcert {doc['tool_version']} {doc['run_spec']['command']}"]
    if doc.get("function"):
        fn = doc["function"]
        lines.append(f"function {fn['name']} (dim {fn['dim']})")
    for s in doc.get("suites") or []:
        extra = f", {s['n_inapplicable']} inapplicable" if s["n_inapplicable"] else ""
        lines.append(f"[{'PASS' if s['passed'] else 'FAIL'}] {s['name']}: {s['statement']} "
                     f"(n={s['n_checked']}{extra}, worst gap {s['worst_gap']!r})")
    for c in doc.get("checks") or []:
        lines.append(_text_verdict(c))
    for pre in doc.get("compose_assumptions") or []:
        convex_ok = pre["convex"]["verdict"] == "holds"
        lines.append(f"[{'PASS' if convex_ok else 'FAIL'}] outer {pre['outer']} convex on its box")
        lines.append(f"[{'PASS' if pre['monotone']['passed'] else 'FAIL'}] outer {pre['outer']} "
                     "nondecreasing on its box")
    if doc.get("estimate"):
        lines.append(f"L_hat = {doc['estimate']['L_hat']!r} over {doc['estimate']['n_pairs']} pairs")
    if doc.get("minimal_L"):
        m = doc["minimal_L"]
        lines.append(f"minimal L for nest0 = {m['L_star']!r} ({m['probes']} probes; "
                     f"fresh seed {'holds' if m['fresh_seed_holds'] else 'FAILS'})")
        if doc.get("estimates_agree") is False:
            lines.append("warning: L_hat and minimal L differ by more than 2%; sampling may be insufficient")
    if doc.get("dag"):
        d = doc["dag"]
        lines.append(f"L = {d['L']!r}")
        for c in d["verdicts"]:
            lines.append("  " + _text_verdict(c))
        lines.append("  gate " + _text_verdict(d["convexity_gate"]))
        lines.append(d["summary"])
    if doc.get("replay"):
        r = doc["replay"]
        for row in r["rows"]:
            lines.append(f"{row['path']}: stored {row['stored_residual']!r} recomputed "
                         f"{row['recomputed_residual']!r} {'match' if row['match'] else 'MISMATCH'}")
        lines.append(f"replayed {r['n_counterexamples']} counterexample(s) from {r['source']}")
    for e in doc.get("errors") or []:
        lines.append(f"error: {e['type']}: {e['message']}")
    lines.append(f"status: {doc['status']} (exit {doc['exit_code']})")
    return "\n".join(lines) + "\n"


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    spec = RunSpec(**vars(ns))
    code, doc = run(spec)
    text = dumps(doc) + "\n" if spec.output == "json" else render_text(doc)
    if spec.output_path:
        with open(spec.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
