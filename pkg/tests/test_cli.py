import csv
import io
import json
import math
import subprocess
import sys

import pytest

from symflow.catalog import get_entry
from symflow.cli import main
from symflow.scalar_matrix import MatrixK, matrix_from_json, matrix_to_json

from conftest import R2


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        p = tmp_path / name
        p.write_text(json.dumps(obj))
        return str(p)

    sp1 = get_entry("sp1_u1")
    sp2 = get_entry("sp2_u2")
    return {
        "x_sp1": write("x_sp1.json", matrix_to_json(sp1.X)),
        "x_sp2": write("x_sp2.json", matrix_to_json(sp2.X)),
        "one": write("one.json", matrix_to_json(MatrixK.identity("H", 1))),
        "center": write("center.json", matrix_to_json(MatrixK.from_quaternion([0, 0, R2, R2]))),
        "sigma_sp2": write("sigma.json", sp2.spec.to_json()),
        "bad_space": write("bad.json", {"name": "bad", "field": "C", "n": 2, "sigma": {
            "conjugator": matrix_to_json(MatrixK.from_real_diag("C", [2.0, 0.5]))}}),
        "write": write,
    }


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify(capsys, files):
    code, out, _ = run(capsys, "verify", "--space", "sp1_u1")
    obj = json.loads(out)
    assert code == 0 and obj["passed"] and max(obj["residuals"].values()) < 1e-12
    code, out, _ = run(capsys, "verify", "--space", files["bad_space"])
    obj = json.loads(out)
    assert code == 1 and not obj["passed"] and "star" in obj["failed"]
    code, out, _ = run(capsys, "verify", "--space", "group")
    assert code == 0 and json.loads(out)["group_mode"]


def test_critical(capsys, files):
    code, out, _ = run(capsys, "critical", "--space", "sp1_u1", "--X", files["x_sp1"], "--mode", "model", "--restarts", "8")
    recs = json.loads(out)
    assert code == 0 and len(recs) == 2
    assert recs[0]["value"] == pytest.approx(-math.sqrt(2))
    assert {"point", "value", "residual", "hessian_eigenvalues", "kernel_dim", "morse", "cluster_size"} <= set(recs[0])
    code2, out2, _ = run(capsys, "critical", "--space", "sp1_u1", "--X", files["x_sp1"], "--mode", "model", "--restarts", "8")
    assert out2 == out
    code, out, _ = run(capsys, "critical", "--space", "group", "--X", files["x_sp2"], "--mode", "group", "--restarts", "8")
    assert code == 0 and any(r["kernel_dim"] == 4 for r in json.loads(out))


def test_critical_errors(capsys, files):
    code, _, err = run(capsys, "critical", "--space", "sp2_u2", "--X", files["x_sp1"], "--mode", "model")
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "critical", "--space", "group", "--X", files["x_sp1"], "--mode", "model")
    assert code == 2
    code, _, err = run(capsys, "critical", "--space", "sp1_u1", "--X", "/nonexistent.json", "--mode", "model")
    assert code == 2


def test_flow_closed_and_both(capsys, files):
    args = ["flow", "--space", "sp1_u1", "--X", files["x_sp1"], "--alpha0", files["one"],
            "--center", files["center"], "--t1", "1", "--steps", "4"]
    code, out, _ = run(capsys, *args)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 5
    assert list(rows[0])[:2] == ["t", "a11_w"]
    last = rows[-1]
    assert float(last["a11_w"]) == pytest.approx(1 / math.cosh(math.sqrt(2)), abs=1e-12)
    heights = [float(r["height"]) for r in rows]
    assert heights == sorted(heights)
    code, out, _ = run(capsys, *args, "--method", "both")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 10 and {r["method"] for r in rows} == {"closed", "rk4"}
    closed = [r for r in rows if r["method"] == "closed"]
    rk4 = [r for r in rows if r["method"] == "rk4"]
    for a, b in zip(closed, rk4):
        assert float(a["a11_y"]) == pytest.approx(float(b["a11_y"]), abs=1e-6)


def test_flow_rk4_rejects_negative_start(capsys, files):
    code, _, err = run(capsys, "flow", "--space", "sp1_u1", "--X", files["x_sp1"], "--alpha0", files["one"],
                       "--center", files["center"], "--t0", "-1", "--t1", "1", "--method", "rk4")
    assert code == 2 and "t0" in err


def test_reduce(capsys, files):
    code, out, _ = run(capsys, "reduce", "--space", "sp2_u2", "--X", files["x_sp2"])
    obj = json.loads(out)
    assert code == 0 and obj["values"] == pytest.approx([2.0, 2 * math.sqrt(2)])
    assert len(obj["critical_points"]) == 4 and obj["residuals"]["sigma_Theta"] < 1e-8
    code, _, _ = run(capsys, "reduce", "--space", "group", "--X", files["x_sp2"])
    assert code == 2


def test_decompose(capsys, files):
    code, out, _ = run(capsys, "decompose", "--Y", files["x_sp2"], "--kind", "svd")
    obj = json.loads(out)
    assert code == 0 and obj["block_sizes"] == [0, 2]
    code, out, _ = run(capsys, "decompose", "--Y", files["x_sp2"], "--kind", "polar", "--side", "right")
    obj = json.loads(out)
    assert obj["S"] is not None and obj["Omega"] is not None
    sp2 = get_entry("sp2_u2")
    from symflow.height import xhat

    y = files["write"]("y.json", matrix_to_json(xhat(sp2.spec.sigma, sp2.X).H))
    code, out, _ = run(capsys, "decompose", "--sigma", files["sigma_sp2"], "--Y", y, "--kind", "adapted-svd")
    obj = json.loads(out)
    assert code == 0 and obj["residuals"]["sigma_Theta"] < 1e-8
    Theta = matrix_from_json(obj["Theta"])
    assert Theta.n == 2
    code, _, err = run(capsys, "decompose", "--Y", y, "--kind", "adapted-polar")
    assert code == 2 and "--sigma" in err


def test_replication_suite_command(capsys):
    code, out, err = run(capsys, "paper-suite", "--filter", "sp1_u1")
    assert code == 0 and json.loads(out)["passed"]
    assert err.count("PASS") == 8
    code, out, err = run(capsys, "paper-suite", "--filter", "sp1_u1", "--tighten", "1e6")
    assert code == 1 and json.loads(out)["tolerance_limited"]


def test_console_script_and_cluster_gap(files):
    y = files["write"]("close.json", matrix_to_json(MatrixK.from_real_diag("R", [1.0, 1.2])))
    base = [sys.executable, "-m", "symflow.cli"]
    tail = ["decompose", "--Y", y, "--kind", "svd"]
    fine = subprocess.run(base + tail, capture_output=True, text=True, check=True)
    coarse = subprocess.run(base + ["--cluster-gap", "0.5"] + tail, capture_output=True, text=True, check=True)
    assert json.loads(fine.stdout)["block_sizes"] == [0, 1, 1]
    assert json.loads(coarse.stdout)["block_sizes"] == [0, 2]


def test_env_tolerance_override(files):
    import os

    env = dict(os.environ, SYMFLOW_TOL='{"critical": 1e-3}')
    res = subprocess.run(
        [sys.executable, "-c", "from symflow.tolerances import TOL; print(TOL.critical, TOL.membership)"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert res.stdout.split() == ["0.001", "1e-09"]
    env["SYMFLOW_TOL"] = "1e-6"
    res = subprocess.run([sys.executable, "-c", "from symflow.tolerances import TOL; print(TOL.membership)"],
                         capture_output=True, text=True, env=env, check=True)
    assert res.stdout.strip() == "1e-06"
