import json

import numpy as np
import pytest

from spectrotemporal import NumericDivergenceError
from spectrotemporal import cli
from spectrotemporal import sweep as sweep_mod

FAST = ["--set", "block_length_symbols=32", "--set", "oversampling_sps=4", "--max-iters", "10"]


def test_solve_writes_outputs(tmp_path, capsys):
    assert cli.main(["solve", "--out-dir", str(tmp_path), *FAST, "--set", "stage_count=2"]) == 0
    names = {p.name for p in tmp_path.iterdir()}
    assert {"phases.csv", "psd.csv", "constellation.csv", "summary.json", "trace.csv", "metadata.json"} <= names
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary) >= {"sdr_db", "iterations", "dispersive_efficiency_ratio"}
    phases = np.loadtxt(tmp_path / "phases.csv", delimiter=",", skiprows=1)
    assert phases.shape == (128, 3)
    psd = np.loadtxt(tmp_path / "psd.csv", delimiter=",", skiprows=1)
    np.testing.assert_allclose(psd[:, 1:].max(axis=0), 0.0)
    # drive spectrum is empty beyond the modulator bandwidth
    assert np.all(psd[psd[:, 0] > 0.55, 1:] <= -150)
    const = np.loadtxt(tmp_path / "constellation.csv", delimiter=",", skiprows=1)
    assert const.shape == (32, 2)
    assert json.loads(capsys.readouterr().out)["iterations"] == summary["iterations"]


def test_sweep_writes_csv_and_metadata(tmp_path):
    args = ["sweep-bandwidth", "--out-dir", str(tmp_path), *FAST,
            "--seed-list", "0,1", "--set", "stage_counts=1", "--set", "grid=0.25,0.5"]
    assert cli.main(args) == 0
    text = (tmp_path / "sdr_bandwidth.csv").read_text().splitlines()
    assert text[0] == "bw,1"
    assert text[1].startswith("0.25,")
    assert (tmp_path / "sdr_bandwidth_upper.csv").exists()
    meta = json.loads((tmp_path / "sdr_bandwidth.json").read_text())
    assert meta["config"]["dispersion_psnm_norm"] == 0.1


def test_laser_sweep_header(tmp_path):
    args = ["sweep-laser", "--out-dir", str(tmp_path), *FAST,
            "--seed-list", "0", "--set", "stage_counts=3", "--set", "grid=-30,0"]
    assert cli.main(args) == 0
    assert (tmp_path / "sinad_laser_power.csv").read_text().splitlines()[0] == "laser_powers,3,IQ"


def test_dac_sweep_header(tmp_path):
    args = ["sweep-dac", "--out-dir", str(tmp_path), *FAST,
            "--seed-list", "0", "--set", "stage_counts=2", "--set", "grid=2,8"]
    assert cli.main(args) == 0
    lines = (tmp_path / "sinad_dac_bits.csv").read_text().splitlines()
    assert lines[0] == "bits,2"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "8"]


@pytest.mark.parametrize(
    "extra",
    [["--set", "nonsense=1"], ["--set", "stage_count"], ["--set", "pm_bandwidth_fs=abc"], ["--config", "/no/such/file"]],
)
def test_config_errors_exit_2(tmp_path, extra, capsys):
    assert cli.main(["sweep-dispersion", "--out-dir", str(tmp_path), *extra]) == cli.EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("block_length_symbols = 32\noversampling_sps = 4\nmax_iterations = 5\nstage_count = 1\n")
    assert cli.main(["solve", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    meta = json.loads((tmp_path / "o" / "metadata.json").read_text())
    assert meta["system"]["block_length"] == 32


def test_divergence_exit_code(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericDivergenceError(1)

    monkeypatch.setattr(sweep_mod, "solve", boom)
    monkeypatch.setattr(cli, "solve", boom)
    args = ["--out-dir", str(tmp_path), *FAST, "--seed-list", "0", "--set", "stage_counts=1", "--set", "grid=0.1"]
    assert cli.main(["sweep-dispersion", *args]) == cli.EXIT_DIVERGED
    assert cli.main(["solve", "--out-dir", str(tmp_path), *FAST]) == cli.EXIT_DIVERGED
