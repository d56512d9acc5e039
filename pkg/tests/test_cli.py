import csv
import json
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from ite_rgd import cli
from ite_rgd.ensemble import BoundVerdict

from conftest import CONFIGS

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"
SMALL = DATA / "small.config"


def run(argv):
    return cli.main([str(a) for a in argv])


@pytest.mark.parametrize("command", ["ite", "rgd", "srgd", "ensemble"])
def test_outputs_match_golden_files(command, tmp_path):
    assert run([command, SMALL, "--out-dir", tmp_path, "--jobs", 1]) == 0
    expected = sorted(p.name for p in (GOLDEN / command).iterdir())
    assert sorted(p.name for p in tmp_path.iterdir()) == expected
    for name in expected:
        assert (tmp_path / name).read_bytes() == (GOLDEN / command / name).read_bytes(), name


def test_ensemble_csv_schema(tmp_path):
    run(["ensemble", SMALL, "--out-dir", tmp_path, "--jobs", 1])
    with open(tmp_path / "srgd_001.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == list(cli.TRAJECTORY_COLUMNS)
    assert len(rows) == 21
    assert rows[0]["sampled_index"] == ""
    assert all(0 <= int(r["sampled_index"]) < 3 for r in rows[1:])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["num_trajectories"] == 3
    assert summary["verdict.theorem1.pass"] is True


def test_ite_with_zero_beta_returns_the_input_state(tmp_path):
    assert run(["ite", SMALL, "--beta", 0, "--out-dir", tmp_path]) == 0
    with open(tmp_path / "state.csv") as fh:
        rows = list(csv.DictReader(fh))
    amps = [complex(float(r["real"]), float(r["imag"])) for r in rows]
    np.testing.assert_allclose(amps, [2**-0.5, 2**-0.5], atol=1e-16)


def test_flag_overrides(tmp_path):
    run(["rgd", SMALL, "--steps", 7, "--beta", 0.5, "--out-dir", tmp_path])
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["num_steps"] == 7 and summary["beta"] == 0.5
    assert summary["num_trajectories"] == 0


def test_out_dir_environment_variable(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path / "env"))
    assert run(["ite", SMALL]) == 0
    assert (tmp_path / "env" / "ite.csv").is_file()


def test_failed_verdict_exits_2_but_writes_artifacts(tmp_path, monkeypatch):
    real = cli.run_experiment

    def failing(cfg, jobs=1):
        result = real(cfg, jobs)
        bad = BoundVerdict("theorem2_mean", "statistical", 2.0, 1.0, False, cfg.schedule.num_steps)
        return replace(result, verdicts=result.verdicts + (bad,))

    monkeypatch.setattr(cli, "run_experiment", failing)
    assert run(["ensemble", SMALL, "--out-dir", tmp_path]) == cli.EXIT_BOUND_FAILED
    assert json.loads((tmp_path / "summary.json").read_text())["all_passed"] is False


@pytest.mark.parametrize(
    "body, message",
    [
        ("[schedule]\nbeta = 1\nsteps = 5\n", "lacks a [hamiltonian]"),
        ("[hamiltonian]\nterms = 1.0 Q\n[schedule]\nsteps = 5\n", "invalid config"),
        ("[hamiltonian]\nterms = 1.0 Z\n[schedule]\nsteps = 0\n", "invalid config"),
        ("[hamiltonian]\nterms = 1.0 Z\n[schedule]\nsteps = 5\n[initial_state]\npreset = basis\nbits = 01\n",
         "bits"),
        ("[hamiltonian]\nterms = 1.0 ZZZZZZZ\n[schedule]\nsteps = 5\n", "size cap"),
        ("[hamiltonian]\nterms = 1.0 Z\n[schedule]\nsteps = 5\n[bounds]\nconvention = loose\n", "invalid config"),
        ("not an ini file", "malformed"),
    ],
)
def test_config_errors_exit_1(tmp_path, capsys, body, message):
    path = tmp_path / "bad.config"
    path.write_text(body)
    assert run(["rgd", path, "--out-dir", tmp_path / "out"]) == cli.EXIT_USAGE
    assert message in capsys.readouterr().err


def test_missing_config_and_bad_usage(tmp_path, capsys):
    assert run(["rgd", tmp_path / "nope.config"]) == 1
    assert "not found" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run(["frobnicate"])
    assert exc.value.code == 1


def test_degenerate_input_exits_1(tmp_path, capsys):
    path = tmp_path / "deg.config"
    path.write_text("[hamiltonian]\nterms = 1.0 Z\n[initial_state]\npreset = basis\nbits = 0\n"
                    "[schedule]\nbeta = 1000\nsteps = 2\n")
    assert run(["ite", path, "--out-dir", tmp_path / "out"]) == 1
    assert "degenerate" in capsys.readouterr().err


def test_amplitude_initial_state(tmp_path):
    path = tmp_path / "amp.config"
    path.write_text("[hamiltonian]\nterms = 1.0 X\n[initial_state]\npreset = amplitudes\n"
                    "amplitudes = 1, 1j\n[schedule]\nbeta = 0.5\nsteps = 10\n")
    assert run(["ite", path, "--out-dir", tmp_path / "out"]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["initial_state"].startswith("amplitudes:")


def test_bounds_subcommand(capsys):
    assert run(["bounds", "--beta", 1, "--steps", 300, "--h-norm", 1, "--D", 3, "--d", 2, "--grad-hs-sq", 2]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["exact.theorem1"] == pytest.approx(0.44665, abs=1e-5)
    assert doc["exact.avg_energy_lb"] == pytest.approx(2 / 24)
    assert doc["printed.avg_energy_lb"] == pytest.approx(2 / 16)
    assert doc["exact.delta_tilde"] == pytest.approx(0.05)


def test_bounds_rejects_bad_scalars(capsys):
    assert run(["bounds", "--beta", -1, "--steps", 3]) == 1
    assert run(["bounds", "--beta", 1, "--steps", 0]) == 1


@pytest.mark.parametrize("name", ["z_plus.config", "two_qubit.config"])
def test_shipped_configs_parse(name):
    cfg = cli.load_config(CONFIGS / name)
    assert cfg.num_qubits <= 2
    assert cfg.num_trajectories > 0
