import csv
import json
import subprocess

import numpy as np
import pytest

from restartkit.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, main
from restartkit.experiments import read_traces
from restartkit.oracles import gen_quadratic, load_problem

SMALL_LASSO = ["--experiment", "lasso", "--n", "100", "--m", "30", "--s", "5", "--max-iters", "150"]


def test_run_writes_trace_and_summary(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["run", *SMALL_LASSO, "--seed", "2", "--out", str(out)]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["experiment"] == "lasso" and summary["seed"] == 2
    assert [r["run_id"] for r in summary["runs"]] == ["ista", "fista", "func", "grad"]
    assert set(read_traces(out)) == {"ista", "fista", "func", "grad"}


def test_run_json_and_restart(tmp_path):
    out, summ = tmp_path / "t.json", tmp_path / "s.json"
    code = main(["run", *SMALL_LASSO, "--restart", "grad", "--format", "json",
                 "--out", str(out), "--summary", str(summ)])
    assert code == EXIT_OK
    assert list(read_traces(out)) == ["grad"]
    assert json.loads(summ.read_text())["params"]["restart"] == "grad"


def test_config_file_with_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "boxqp", "n": 30, "cond": 100.0, "max_iters": 40, "seed": 1}))
    assert main(["run", "--config", str(cfg), "--max-iters", "25"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["params"]["max_iters"] == 25
    assert summary["params"]["n"] == 30 and summary["seed"] == 1


def test_trajectory_export(tmp_path, capsys):
    traj = tmp_path / "x.csv"
    assert main(["run", "--experiment", "trajectory_2d", "--trajectory", str(traj)]) == EXIT_OK
    with open(traj) as fh:
        assert next(csv.reader(fh)) == ["run_id", "k", "x1", "x2"]
    assert main(["run", *SMALL_LASSO, "--trajectory", str(traj)]) == EXIT_INPUT


def test_sweep(capsys):
    code = main(["sweep", "--experiment", "logsumexp", "--n", "5", "--m", "20",
                 "--max-iters", "50", "--param", "rho=0.5,1"])
    assert code == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["values"] == [0.5, 1.0]
    assert [s["params"]["rho"] for s in doc["summaries"]] == [0.5, 1.0]


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--experiment", "nope"],
        ["run"],
        ["run", *SMALL_LASSO, "--restart", "sometimes"],
        ["run", *SMALL_LASSO[:-2], "--max-iters", "ten"],
        ["run", "--experiment", "lasso", "--rho", "-1"],
        ["run", "--config", "/nonexistent/c.json"],
        ["sweep", "--experiment", "lasso", "--param", "rho"],
        ["sweep", "--experiment", "lasso", "--param", "colour=1,2"],
        ["generate", "--problem", "quadratic", "--out", "/tmp/never.json"],
        ["frobnicate"],
    ],
)
def test_input_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_INPUT
    assert capsys.readouterr().err


def test_numeric_failure_exit_3(monkeypatch, capsys):
    from restartkit import cli
    from restartkit.exceptions import NumericError

    def boom(cfg):
        raise NumericError("diverged", None)

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert main(["run", *SMALL_LASSO]) == EXIT_NUMERIC
    assert "numeric" in capsys.readouterr().err


def test_regimes(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["regimes", "--betas", "0,0.5,0.99", "--lam-ratios", "0.01,1", "--out", str(out)]) == EXIT_OK
    rows = list(csv.reader(open(out)))
    assert rows[0] == ["beta", "lam_ratio", "regime", "root1_re", "root1_im", "root2_re", "root2_im", "psi"]
    assert len(rows) == 7


def test_generate_round_trip(tmp_path):
    out = tmp_path / "q.json"
    assert main(["generate", "--problem", "quadratic", "--n", "6", "--cond", "50",
                 "--seed", "4", "--with-linear", "--out", str(out)]) == EXIT_OK
    loaded = load_problem(out)
    fresh = gen_quadratic(6, 50.0, 4, with_linear=True)
    x = np.linspace(-1, 1, 6)
    assert loaded.value(x) == fresh.value(x)


def test_console_script(tmp_path):
    proc = subprocess.run(["restartkit", "run", "--experiment", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
    proc = subprocess.run(["restartkit", "regimes", "--out", str(tmp_path / "r.csv")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
