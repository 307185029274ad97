import json
import subprocess
import sys

import pytest

from saddlescope import cli


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_list(capsys):
    code, out = run(["list"], capsys)
    assert code == 0 and len(out.out.strip().splitlines()) == 6
    code, out = run(["list", "--json"], capsys)
    rows = json.loads(out.out)
    assert code == 0 and len(rows) == 6 and rows[0]["name"] == "augmented-lagrangian"


@pytest.mark.parametrize("argv", [["list", "--bogus"], ["run"], ["run", "--scenario", "nope"],
                                  ["run", "--scenario", "quasi", "--x0", "1"],
                                  ["run", "--scenario", "quasi", "--x0", "a,b"],
                                  ["run", "--scenario", "quasi", "--rtol", "-1"]])
def test_usage_errors(argv, capsys, tmp_path):
    code, _ = run(argv + (["--out-dir", str(tmp_path)] if argv[0] == "run" else []), capsys)
    assert code == 2


def test_run_augmented_lagrangian(tmp_path, capsys):
    code, _ = run(["run", "--scenario", "augmented-lagrangian", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,s1,s2,s3,s4,field_norm,F,objective"
    end = [float(v) for v in lines[-1].split(",")[1:5]]
    assert end == pytest.approx([-1.5, -1.5, 3.0, 0.0], abs=0.02)


def test_run_patchy_files(tmp_path, capsys):
    code, _ = run(["run", "--scenario", "patchy", "--out-dir", str(tmp_path)], capsys)
    assert code == 0
    for name in ("trajectory.csv", "report.json", "plot_distance.tsv", "plot_monitors.tsv", "plot_states.tsv"):
        assert (tmp_path / name).exists()
    raw = (tmp_path / "trajectory.csv").read_bytes()
    assert b"\r" not in raw
    report = json.loads((tmp_path / "report.json").read_text())
    for key in ("config", "seed", "stop_reason", "endpoint", "certificates", "timestamp"):
        assert key in report
    assert report["certificates"][0]["certificate"]["tolerances"]


def test_csv_full_precision(tmp_path, capsys):
    run(["run", "--scenario", "quasi", "--out-dir", str(tmp_path)], capsys)
    row = (tmp_path / "trajectory.csv").read_text().splitlines()[2].split(",")
    assert all(float(format(float(v), ".17g")) == float(v) for v in row)
    assert len(row[1].replace("-", "").replace(".", "").split("e")[0]) >= 15


def test_run_quasi_with_x0(tmp_path, capsys):
    code, _ = run(["run", "--scenario", "quasi", "--x0", "0.5,0.2", "--out-dir", str(tmp_path)], capsys)
    assert code == 0


def test_certify_ring(capsys):
    code, out = run(["certify", "--scenario", "ring-lagrangian"], capsys)
    assert code == 0
    assert "spectrum" in out.out and "lemma-eigenvalue" in out.out


def test_certify_quartic_echoes_constants(capsys):
    code, out = run(["certify", "--scenario", "quartic-ring", "--json"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    prox = next(c for c in rep["certificates"] if c["label"] == "proximal")["certificate"]
    assert prox["verdict"] == "pass"
    assert {k: prox["constants"][k] for k in ("k1", "alpha1", "k2", "beta1")} == \
        {"k1": 1.0, "alpha1": 4.0, "k2": 1.0, "beta1": 2.0}


def test_certify_strict_cc_expected_fail(capsys):
    code, out = run(["certify", "--scenario", "augmented-lagrangian", "--strict-cc", "--json"], capsys)
    rep = json.loads(out.out)
    strict = next(c for c in rep["certificates"] if c["label"] == "convex-concave-strict")
    assert strict["certificate"]["verdict"] == "fail" and strict["matched"]
    assert code == 0


def test_endpoint_mismatch_exit_code(tmp_path, capsys):
    code, _ = run(["run", "--scenario", "xz-squared", "--t-max", "0.3", "--out-dir", str(tmp_path)], capsys)
    assert code == 1
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["ok"] is False
    assert report["stop_reason"] == "t_max"
    assert not report["endpoint_checks"]["field_ok"]


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _ = run(["run", "--scenario", "quasi", "--out-dir", str(blocker / "sub")], capsys)
    assert code == 3


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scenario": "xz-squared", "seed": 4, "integrator": {"rtol": 1e-9}}))
    code, out = run(["run", "--config", str(cfg), "--seed", "9", "--json", "--out-dir", str(tmp_path / "o")], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["seed"] == 9 and rep["config"]["integrator"] == {"rtol": 1e-9}
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["run", "--config", str(bad)], capsys)[0] == 2


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SADDLESCOPE_SEED", "42")
    code, out = run(["certify", "--scenario", "patchy", "--json"], capsys)
    assert json.loads(out.out)["seed"] == 42


def test_sweep_with_jobs(tmp_path, capsys):
    code, out = run(["run", "--scenario", "quasi", "--x0", "0.3,0.1", "--x0=-0.2,0.4", "--jobs", "2",
                     "--json", "--out-dir", str(tmp_path)], capsys)
    reps = json.loads(out.out)
    assert code == 0 and len(reps) == 2
    assert (tmp_path / "x0_000" / "trajectory.csv").exists() and (tmp_path / "x0_001" / "report.json").exists()
    assert reps[1]["initial"] == [-0.2, 0.4]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "saddlescope.cli", "list"], capture_output=True, text=True)
    assert proc.returncode == 0 and "patchy" in proc.stdout
