import subprocess
import sys

import pytest

from mobigossip import __version__
from mobigossip.cli import main
from mobigossip.geometry import NetworkConfig
from mobigossip.gossip import GossipConfig, run_spread
from mobigossip.harness import derive_seed, read_csv
from mobigossip.mobility import FullyRandom


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv, line", [
    (["--which", "fully-random"], "fully-random,0.5"),
    (["--which", "velocity", "--r", "0.1", "--vmax", "0.05"], "velocity,0.0583333333"),
    (["--which", "one-dim", "--n", "1000", "--nv", "500", "--nh", "500", "--phis", "0.04882"],
     "one-dim,0.27441"),
    (["--which", "partially-random", "--n", "100", "--k", "100", "--phis", "0.03"],
     "partially-random,0.5"),
    (["--which", "two-dim", "--r", "0.1", "--rc", "0.05"], "two-dim,0.0583333333"),
    (["--which", "static", "--r", "0.1"], "static,0.0381971863"),
])
def test_formula(capsys, argv, line):
    code, out, _ = run(capsys, "formula", *argv)
    assert code == 0 and out.strip() == line


@pytest.mark.parametrize("argv", [
    ["formula", "--which", "velocity", "--r", "0.1", "--vmax", "-1"],
    ["formula", "--which", "velocity", "--r", "0.1"],
    ["formula", "--which", "nonsense"],
    ["spread", "--n", "100", "--model", "velocity", "--model-params", "vmax=-1"],
    ["spread", "--n", "100", "--model", "velocity", "--model-params", "vmax"],
    ["spread", "--n", "100", "--model", "static", "--no-such-flag"],
    ["spread", "--n", "100", "--model", "static", "--epsilon", "2"],
    ["spread", "--n", "2", "--model", "static", "--positions", "0.5,0.5"],
    ["experiment", "/nonexistent/config.cfg"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and __version__ in capsys.readouterr().out


def test_spread_deterministic(capsys):
    argv = ["spread", "--n", "300", "--model", "fully-random", "--rounds", "4", "--seed", "7",
            "--jobs", "1"]
    code1, out1, err = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0 and out1 == out2
    assert "mean_completion_slot" in err and "mean" not in out1.splitlines()[0]


def test_spread_is_thin_shell(capsys):
    _, out, _ = run(capsys, "spread", "--n", "300", "--model", "fully-random", "--rounds", "3",
                    "--seed", "5", "--jobs", "1")
    rows = read_csv(out)
    cfg = NetworkConfig(300)
    direct = [run_spread(cfg, FullyRandom(), GossipConfig(), "random", derive_seed(5, 0, k))
              for k in range(3)]
    assert [int(r["completion_slot"]) for r in rows] == [t.completion_slot for t in direct]


def test_two_close_nodes_finish_in_one_slot(capsys):
    code, out, _ = run(capsys, "spread", "--n", "2", "--model", "static", "--rounds", "1",
                       "--seed", "1", "--positions", "0.4,0.4;0.45,0.42", "--jobs", "1")
    assert code == 0 and read_csv(out)[0]["completion_slot"] == "1"


def test_velocity_params_accepted(capsys, tmp_path):
    out = tmp_path / "v.csv"
    code, stdout, _ = run(capsys, "spread", "--n", "200", "--model", "velocity",
                          "--model-params", "vmax=0.1", "--rounds", "2", "--out", str(out),
                          "--jobs", "1")
    assert code == 0 and stdout == ""
    assert read_csv(out)[0]["model_params"] == "vmax=0.1"


def test_conductance_and_oracle(capsys):
    code, out, err = run(capsys, "conductance", "--n", "300", "--model", "fully-random",
                         "--samples", "10", "--jobs", "1")
    assert code == 0 and read_csv(out)[0]["method"] == "empirical-mobile"
    assert "analytic_conductance=0.5" in err
    code, out, err = run(capsys, "oracle", "--n", "8", "--instances", "3", "--jobs", "1")
    assert code == 0 and len(read_csv(out)) == 6 and "frac_sweep_ge_exhaustive=1" in err


def test_experiment(capsys, tmp_path):
    cfg = tmp_path / "e.cfg"
    cfg.write_text("id = cli-e\nkind = spread-scaling\nn_grid = 100\nrounds = 2\n"
                   "model.0 = static\n")
    code, _, err = run(capsys, "experiment", str(cfg), "--output", str(tmp_path), "--jobs", "1")
    assert code == 0 and (tmp_path / "cli-e_raw.csv").exists()
    assert (tmp_path / "cli-e_summary.csv").exists()


def test_experiment_failure_exit_code(capsys, tmp_path, monkeypatch):
    from mobigossip import harness

    def boom(task):
        raise RuntimeError("nope")

    monkeypatch.setattr(harness, "_run_task", boom)
    cfg = tmp_path / "e.cfg"
    cfg.write_text("id = bad\nkind = spread-scaling\nn_grid = 50\nrounds = 1\nmodel.0 = static\n")
    code, _, err = run(capsys, "experiment", str(cfg), "--output", str(tmp_path), "--jobs", "1")
    assert code == 1 and "failed" in err


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "mobigossip", "formula", "--which",
                          "fully-random"], capture_output=True, text=True, check=True)
    assert res.stdout.strip() == "fully-random,0.5"
