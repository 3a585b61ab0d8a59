import csv
import json

import pytest

from lsiwave.cli import main


def write(tmp_path, text):
    p = tmp_path / "cfg.toml"
    p.write_text(text)
    return str(p)


QUICK = "run.t_end = 0.2\nrun.record_every = 50\n"


def test_soliton(tmp_path, capsys):
    assert main(["soliton", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "profile.csv").exists()
    meta = json.loads((tmp_path / "profile.json").read_text())
    assert meta["Omega"] == pytest.approx(1.0) and meta["n"] == 1024
    assert "ode residuals" in capsys.readouterr().out


def test_check_emits_json(tmp_path, capsys):
    assert main(["check", "--out", str(tmp_path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["ok"] and report["mu_constrained"] > 0
    assert json.loads((tmp_path / "check.json").read_text()) == report


def test_evolve_writes_trajectory_and_snapshots(tmp_path):
    cfg = write(tmp_path, QUICK + "outputs.snapshot_times = [0.1]\nperturbation.delta = 1e-3\n")
    assert main(["evolve", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    with open(tmp_path / "o" / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[-1]["t"]) == pytest.approx(0.2)
    assert (tmp_path / "o" / "snapshot_t0.1_phi.csv").exists()


def test_stability_with_seed_override(tmp_path, capsys):
    cfg = write(tmp_path, QUICK + 'perturbation.kind = "random_fourier"\nperturbation.delta = 1e-3\n')
    assert main(["stability", "--config", cfg, "--out", str(tmp_path), "--seed", "42"]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["seed"] == 42 and rep["ok"]
    assert "sup rho" in capsys.readouterr().out


def test_sweep(tmp_path, capsys):
    cfg = write(tmp_path, QUICK + 'perturbation.kind = "localized_bump"\nsweep.deltas = [1e-3, 2e-3]\n')
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "sweep_summary.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 2
    assert "log-log slope" in capsys.readouterr().out


def test_empty_sweep_succeeds(tmp_path):
    cfg = write(tmp_path, QUICK + "sweep.deltas = []\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("text", ["params.c = 3.0\n", "run.bogus = 1\n", "grid.n = \n"])
def test_config_errors_exit_2(tmp_path, capsys, text):
    assert main(["check", "--config", write(tmp_path, text), "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_tolerance_violation_exits_1(tmp_path, monkeypatch):
    import lsiwave.experiments as ex
    monkeypatch.setattr(ex, "kernel_identities", lambda pr: (1.0, 0.0, 0.0))
    assert main(["check", "--out", str(tmp_path)]) == 1


@pytest.mark.parametrize("argv", [[], ["bogus"], ["check", "--threads", "0"], ["check", "--seed", "x"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 2
