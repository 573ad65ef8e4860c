import csv
import io
import json
import subprocess
import sys

import pytest

from p2pss.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK, main
from p2pss.config import ExperimentConfig, read_kv_file
from p2pss.engine import population
from p2pss.errors import ConfigError
from p2pss.experiment import CSV_HEADER, ground_truth, run_experiment, run_sweep
from p2pss.metrics import score
from p2pss.planner import PlanInputs, k_of_R
from p2pss.protocol import query

SMALL = ["--n", "20000", "--m", "2000", "--p", "8", "--k", "50", "--R", "24", "-q"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


# -- config ---------------------------------------------------------------


def test_default_config():
    c = ExperimentConfig()
    assert (c.rho, c.phi, c.p, c.k, c.R, c.fo, c.n) == (1.2, 0.02, 10_000, 2200, 24, 1, 2_000_000)


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# comment\nn = 20_000\nm=2000\np=8\nk=50\nrepetitions=2\nseed=5\n")
    assert read_kv_file(cfg)["n"] == "20_000"
    code, out, _ = run_cli(capsys, "run", "--config", str(cfg), "--p", "6", "-q")
    assert code == EXIT_OK
    body = rows(out)
    assert body[0] == list(CSV_HEADER)
    peers = [r for r in body[1:] if r[0] not in ("mean", "ci95")]
    assert {r[1] for r in peers} == {"5", "6"}
    assert len(peers) == 2 * 6


def test_env_seed(monkeypatch, capsys):
    monkeypatch.setenv("P2PSS_SEED", "11")
    code, out, _ = run_cli(capsys, "run", *SMALL)
    assert code == EXIT_OK and rows(out)[1][1] == "11"
    code, out, _ = run_cli(capsys, "run", *SMALL, "--seed", "12")
    assert rows(out)[1][1] == "12"


def test_fail_prob_implies_failstop():
    c = ExperimentConfig.from_mapping({"fail_prob": "0.05"})
    assert c.churn == "failstop"
    assert ExperimentConfig.from_mapping({"fail_prob": "0.05", "churn": "yao"}).churn == "yao"


@pytest.mark.parametrize(
    "mapping",
    [{"bogus": "1"}, {"k": "1.5"}, {"phi": "2"}, {"topology": "ring"}, {"fo": "0"}, {"ghost": "maybe"}],
)
def test_bad_config(mapping):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping(mapping)


def test_cli_config_error_exit(capsys):
    code, _, err = run_cli(capsys, "run", "--phi", "1.5", "-q")
    assert code == EXIT_CONFIG and "phi" in err
    code, _, _ = run_cli(capsys, "run", "--config", "/nonexistent/file", "-q")
    assert code == EXIT_CONFIG


def test_insufficient_rounds_exit(capsys):
    code, _, err = run_cli(capsys, "run", *SMALL[:-3], "--R", "0", "-q")
    assert code == EXIT_INFEASIBLE and "eps*" in err


# -- run ------------------------------------------------------------------


def test_zero_rounds_equals_local_query(capsys):
    argv = ["run", "--n", "5000", "--m", "300", "--p", "2", "--k", "40", "--R", "0", "--threshold", "ideal", "-q"]
    code, out, _ = run_cli(capsys, *argv)
    assert code == EXIT_OK
    cfg = ExperimentConfig(n=5000, m=300, p=2, k=40, R=0, threshold="ideal")
    states, _, _ = population(cfg, 0)
    truth = ground_truth(cfg, 0)
    # only peer 0 holds q~ > 0 before any gossip
    rep = query(states[0], cfg.phi, cfg.delta, 2, eps_star=0.0)
    m = score(rep, truth)
    peer0 = rows(out)[1]
    assert peer0[2] == "0"
    assert [float(x) for x in peer0[5:8]] == [m.recall, m.precision, m.are]
    assert rows(out)[2][5] == "nan"


def test_run_deterministic_bytes(capsys):
    _, a, _ = run_cli(capsys, "run", *SMALL, "--churn", "yao", "--repetitions", "2")
    _, b, _ = run_cli(capsys, "run", *SMALL, "--churn", "yao", "--repetitions", "2")
    assert a == b


def test_workers_do_not_change_output(capsys):
    _, a, _ = run_cli(capsys, "run", *SMALL, "--repetitions", "3")
    _, b, _ = run_cli(capsys, "run", *SMALL, "--repetitions", "3", "--workers", "2")
    assert a == b


def test_query_peer_and_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    out_path = tmp_path / "o.csv"
    code, _, _ = run_cli(capsys, "run", *SMALL, "--query-peer", "3", "--trace", str(trace), "--out", str(out_path))
    assert code == EXIT_OK
    body = rows(out_path.read_text())
    assert [r[2] for r in body[1:]] == ["3", "all", "all"]
    tr = rows(trace.read_text())
    assert len(tr) == 1 + 25
    assert float(tr[-1][4]) == pytest.approx(20_000)


def test_summary_on_stderr(capsys):
    code, _, err = run_cli(capsys, "run", *SMALL[:-1])
    assert code == EXIT_OK and "recall" in err


# -- sweep ----------------------------------------------------------------


def test_single_value_sweep_equals_run():
    cfg = ExperimentConfig(n=20_000, m=2_000, p=8, k=50, repetitions=2)
    plain = run_experiment(cfg)
    swept = run_sweep(cfg, "k", [50])
    assert [pr.metrics for pr in plain.peers] == [pr.metrics for pr in swept.peers]


def test_rounds_sweep_matches_separate_runs():
    cfg = ExperimentConfig(n=20_000, m=2_000, p=8, k=50)
    swept = run_sweep(cfg, "rounds", [20, 24])
    sep = run_experiment(cfg.replace(R=20))
    assert [pr.metrics for pr in swept.peers if pr.param_value == "20"] == [pr.metrics for pr in sep.peers]


def test_sweep_cli(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--param", "fanout", "--values", "1,ALL", *SMALL)
    assert code == EXIT_OK
    means = [r for r in rows(out) if r[0] == "mean"]
    assert [(r[3], r[4]) for r in means] == [("fanout", "1"), ("fanout", "ALL")]


def test_sweep_unknown_param(capsys):
    code, _, _ = run_cli(capsys, "sweep", "--param", "colour", *SMALL)
    assert code == EXIT_CONFIG


# -- plan -----------------------------------------------------------------


def test_plan_space_dominant(capsys):
    code, out, _ = run_cli(capsys, "plan", "--strategy", "space-dominant", "--eps", "0.001")
    assert code == EXIT_OK
    line = json.loads(out.strip().splitlines()[-1])
    assert line["k"] == 1001 and line["met"]


def test_plan_time_dominant(capsys):
    code, out, _ = run_cli(capsys, "plan", "--phi", "0.02", "--eps", "0.01", "--delta", "0.05", "--p-star", "10000")
    line = json.loads(out.strip().splitlines()[-1])
    assert code == EXIT_OK
    assert line["R"] == 21
    assert line["k"] == k_of_R(PlanInputs(0.02, 0.01, 0.05, 10_000), 21)
    assert line["tolerance"] <= 0.01
    assert "counters" in out


def test_plan_explicit_unmet(capsys):
    code, out, _ = run_cli(capsys, "plan", "--strategy", "explicit", "--eps", "0.01", "--k", "10", "--R", "24")
    assert code == EXIT_INFEASIBLE and "NOT met" in out
    code, _, _ = run_cli(capsys, "plan", "--strategy", "explicit", "--eps", "0.01")
    assert code == EXIT_CONFIG


def test_plan_invalid(capsys):
    code, _, err = run_cli(capsys, "plan", "--phi", "0.01", "--eps", "0.02")
    assert code == EXIT_CONFIG and "eps" in err


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "p2pss", "plan", "--eps", "0.005"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert json.loads(res.stdout.splitlines()[-1])["met"]
