import json
import subprocess
import sys

import pytest

from convexcert import cli
from convexcert.report import dumps


def run_json(tmp_path, name, *args):
    out = tmp_path / name
    code = cli.main([*args, "--json", "--out", str(out)])
    return code, out.read_text()


def without_timing(text):
    doc = json.loads(text)
    doc.pop("timing")
    return doc, [line for line in text.splitlines() if "wall_seconds" not in line]


def test_check_concave_control_exits_1(tmp_path):
    code, text = run_json(tmp_path, "r.json", "check", "--fn", "neg_norm2", "--dim", "2",
                          "--cond", "convex0", "--seed", "7", "--samples", "1000")
    doc = json.loads(text)
    assert code == 1 and doc["status"] == "counterexample"
    assert doc["checks"][0]["verdict"] == "falsified"
    assert doc["checks"][0]["counterexample"]["shrunk_residual"] > 0


def test_equiv_tight_quadratic_exits_0(tmp_path):
    code, text = run_json(tmp_path, "r.json", "equiv", "--fn", "norm2", "--dim", "2",
                          "--L", "2", "--seed", "7", "--samples", "1000")
    doc = json.loads(text)
    assert code == 0
    assert doc["dag"]["discrepancies"] == []
    assert doc["dag"]["summary"] == "all seven agree: holds"


def test_equiv_without_L_uses_estimate(tmp_path):
    code, text = run_json(tmp_path, "r.json", "equiv", "--fn", "diagq(1,5)", "--samples", "800")
    doc = json.loads(text)
    assert code == 0
    assert doc["dag"]["L"] == pytest.approx(1.05 * doc["estimate"]["L_hat"])


def test_identities_exit_0(tmp_path):
    code, text = run_json(tmp_path, "r.json", "identities", "--seed", "7", "--samples", "2000")
    doc = json.loads(text)
    assert code == 0 and all(s["passed"] for s in doc["suites"])


def test_axioms_exit_0(capsys):
    assert cli.main(["axioms", "--samples", "200"]) == 0
    out = capsys.readouterr().out
    assert "triangle" in out and "status: passed (exit 0)" in out


def test_estimate_reports_agreement(tmp_path):
    code, text = run_json(tmp_path, "r.json", "estimate", "--fn", "norm2", "--dim", "2",
                          "--samples", "800")
    doc = json.loads(text)
    assert code == 0
    assert doc["estimate"]["L_hat"] == pytest.approx(2.0, abs=1e-9)
    assert doc["minimal_L"]["L_star"] == pytest.approx(2.0, rel=0.02)
    assert doc["estimates_agree"] is True


@pytest.mark.parametrize("argv, fragment", [
    (["check", "--fn", "scale(-1, norm2)", "--dim", "2", "--cond", "convex0"], "negative scale"),
    (["check", "--fn", "norm2", "--dim", "2"], "--cond"),
    (["check", "--fn", "norm2", "--dim", "2", "--cond", "nest0"], "--L"),
    (["check", "--fn", "norm2", "--dim", "2", "--cond", "nest9"], "nest9"),
    (["equiv", "--fn", "norm2", "--dim", "2", "--L", "-1"], "L"),
])
def test_usage_errors_exit_2(tmp_path, argv, fragment):
    code, text = run_json(tmp_path, "r.json", *argv)
    doc = json.loads(text)
    assert code == 2 and doc["status"] == "error"
    assert fragment in doc["errors"][0]["message"]


def test_argparse_errors_exit_2(capsys):
    assert cli.main(["frobnicate"]) == 2
    assert cli.main(["check", "--samples", "many"]) == 2
    assert cli.main(["check", "--fn", "norm2", "--cond", "convex0", "--box", "3:1"]) == 2
    assert "empty interval" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["check", "--fn", "neg_norm2", "--dim", "2", "--cond", "convex0", "--seed", "3"],
    ["check", "--fn", "quartic", "--cond", "nest0", "--L", "2", "--seed", "3"],
    ["equiv", "--fn", "norm2", "--dim", "2", "--L", "1.5", "--seed", "3"],
    ["estimate", "--fn", "diagq(1,5)", "--seed", "3"],
    ["identities", "--seed", "3"],
    ["axioms", "--seed", "3"],
])
def test_json_is_byte_identical_modulo_timing(tmp_path, argv):
    argv = [*argv, "--samples", "300"]
    _, first = run_json(tmp_path, "a.json", *argv)
    _, second = run_json(tmp_path, "b.json", *argv)
    assert without_timing(first) == without_timing(second)


def test_replay_reverifies_counterexamples(tmp_path):
    code, _ = run_json(tmp_path, "r.json", "equiv", "--fn", "norm2", "--dim", "2",
                       "--L", "1", "--seed", "11", "--samples", "500")
    assert code == 1
    rcode, text = run_json(tmp_path, "replay.json", "check", "--replay", str(tmp_path / "r.json"))
    doc = json.loads(text)
    rows = doc["replay"]["rows"]
    assert rcode == 0 and rows
    assert all(r["match"] and r["recomputed_residual"] == r["stored_residual"] for r in rows)
    assert all(r["violates"] for r in rows if r["path"].endswith(".shrunk"))


def test_replay_detects_tampering(tmp_path):
    run_json(tmp_path, "r.json", "check", "--fn", "neg_norm2", "--dim", "2",
             "--cond", "convex0", "--samples", "300")
    doc = json.loads((tmp_path / "r.json").read_text())
    doc["checks"][0]["counterexample"]["shrunk_residual"] += 1.0
    (tmp_path / "t.json").write_text(json.dumps(doc))
    code, _ = run_json(tmp_path, "replay.json", "check", "--replay", str(tmp_path / "t.json"))
    assert code == 1


def test_replay_missing_file(tmp_path):
    code, _ = run_json(tmp_path, "replay.json", "check", "--replay", str(tmp_path / "nope.json"))
    assert code == 2


@pytest.mark.parametrize("x", [0.1, 1 / 3, -9.6760567291293178, 2.0 ** -1074, 1e308, 5e-324])
def test_float_serialization_is_lossless(x):
    assert json.loads(dumps({"v": [x, x]}))["v"] == [x, x]


def test_non_finite_values_are_strings():
    assert json.loads(dumps([float("inf"), float("nan")])) == ["inf", "nan"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "convexcert", "check", "--fn", "neg_norm2", "--dim", "2",
         "--cond", "convex0", "--samples", "200"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert "convex0: FALSIFIED" in proc.stdout
