import json
import subprocess
import sys

import pytest

from ginprod.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_REPORT, main


def _run(tmp_path, cmd, cfg, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out_{cmd}"
    return main([cmd, "--config", str(path), "--out", str(out), *extra]), out


KERNEL = {"spec": {"n": 1, "m": 2, "nu": [0, 0]}, "xs": [0.5, 1.0], "ys": [0.7, 2.0]}


def test_kernel_output_is_deterministic_and_hashed(tmp_path):
    code, out = _run(tmp_path, "kernel", KERNEL)
    assert code == EXIT_OK
    first = (out / "kernel.csv").read_bytes()
    resolved = json.loads((out / "config.resolved.json").read_text())
    lines = first.decode().splitlines()
    assert lines[0] == f"# config_sha256={resolved['config_sha256']}"
    assert lines[1] == "r,s,x,y,value,err_estimate"
    assert len(lines) == 2 + 4 * 4
    code, out = _run(tmp_path, "kernel", KERNEL)
    assert (out / "kernel.csv").read_bytes() == first


def test_overrides_change_the_hash(tmp_path):
    _, out = _run(tmp_path, "kernel", KERNEL)
    h1 = json.loads((out / "config.resolved.json").read_text())["config_sha256"]
    _, out = _run(tmp_path, "kernel", KERNEL, "--repr", "general")
    res = json.loads((out / "config.resolved.json").read_text())
    assert res["config"]["representation"] == "general" and res["config_sha256"] != h1


@pytest.mark.parametrize("cfg", [
    {"spec": {"n": 1, "m": 1, "nu": [1, 0]}, "xs": [1.0]},              # nu_0 != 0
    {"spec": {"n": 1, "m": 1, "nu": [0]}, "xs": [1.0], "colour": 1},    # unknown field
    {"spec": {"n": 1, "m": 1, "nu": [0], "family": "truncated"}, "xs": [1.0]},
    {"spec": {"n": 1, "m": 1, "nu": [0]}, "xs": [-1.0]},
    {"spec": {"n": 1, "m": 1, "nu": [0]}, "xs": [1.0], "pairs": [[1, 2]]},
])
def test_config_errors_exit_2(tmp_path, cfg):
    assert _run(tmp_path, "kernel", cfg)[0] == EXIT_CONFIG


def test_missing_or_broken_config(tmp_path):
    assert main(["kernel", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["kernel", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == EXIT_CONFIG
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["kernel", "--config", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_numerical_failure_exit_3(tmp_path):
    cfg = {"spec": {"n": 2, "m": 2, "nu": [0, 1]}, "orders": [3, 4], "tol": 1e-12,
           "windows": [{"time": 1, "interval": [0, 1]}, {"time": 2, "interval": [0, 1]}]}
    assert _run(tmp_path, "gap", cfg)[0] == EXIT_NUMERIC


MC = {"spec": {"n": 1, "m": 2, "nu": [0, 0]}, "trajectories": 100000, "seed": 3, "bins": 20}


def test_mc_passes_and_negative_control_fails(tmp_path):
    code, out = _run(tmp_path, "mc", MC)
    rep = json.loads((out / "report.json").read_text())
    assert code == EXIT_OK and rep["passed"] and len(rep["comparisons"]) == 3
    assert [q["expected"] for q in rep["sum_rule"]] == [1.0, 1.0]
    assert (out / "trajectories.bin").stat().st_size > 100000 * 2 * 8
    assert (out / "rho2_1_2.csv").read_text().startswith("# config_sha256=")
    code, out = _run(tmp_path, "mc", MC, "--perturb-prediction")
    assert code == EXIT_REPORT
    assert json.loads((out / "config.resolved.json").read_text())["config"]["perturb_prediction"] == 1.1


def test_mc_seed_override_reproducible(tmp_path):
    cfg = dict(MC, trajectories=2000, write_batch=True)
    _, out = _run(tmp_path, "mc", cfg, "--seed", "99")
    a = (out / "trajectories.bin").read_bytes()
    _, out = _run(tmp_path, "mc", cfg, "--seed", "99")
    assert (out / "trajectories.bin").read_bytes() == a
    assert json.loads((out / "config.resolved.json").read_text())["config"]["seed"] == 99


def test_hard_edge_command(tmp_path):
    code, out = _run(tmp_path, "hard-edge", {"nu": [0, 0], "ns": [5, 10, 20], "xs": [0.5, 1.0]})
    rows = (out / "hard_edge.csv").read_text().splitlines()
    assert code == EXIT_OK and rows[1] == "n,scale,sup_error,monotone" and len(rows) == 5
    assert rows[-1].endswith(",1")


def test_gap_command_with_mc(tmp_path):
    cfg = {"spec": {"n": 1, "m": 1, "nu": [0]}, "windows": [{"time": 1, "interval": [0, 1]}],
           "mc_trajectories": 20000, "seed": 1}
    code, out = _run(tmp_path, "gap", cfg)
    res = json.loads((out / "gap.json").read_text())
    assert code == EXIT_OK and abs(res["value"] - 0.36787944117144233) < 1e-8
    assert abs(res["mc"]["z"]) < 4


def test_selftest_subprocess():
    proc = subprocess.run([sys.executable, "-m", "ginprod", "selftest"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert proc.stdout.count("PASS") == 7 and "FAIL" not in proc.stdout
