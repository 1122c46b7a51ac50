import json
import subprocess
import sys

import numpy as np
import pytest

import kinlab.kinetic as kin
from kinlab.cli import main
from kinlab.io import read_series
from kinlab.moments import density

SMALL = "n = 32\nnv = 32\nt_end = 0.1\n"


def _cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_simulate_kinetic_at_equilibrium(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "amplitude = 0\n")
    assert main(["simulate-kinetic", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    s = read_series(tmp_path / "o" / "kinetic.csv")
    np.testing.assert_allclose(s["mass"], 1.0, rtol=1e-14)
    assert np.all(s["l2_sq"] < 1e-28)
    meta = json.loads((tmp_path / "o" / "kinetic.json").read_text())
    assert meta["theoretical_gamma"] == pytest.approx(1 / 24)
    assert meta["config"]["n"] == 32 and meta["steps"] == 20


def test_metadata_gamma_follows_config(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "alpha = 1\n")
    assert main(["simulate-diffusion", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    meta = json.loads((tmp_path / "diffusion.json").read_text())
    assert meta["theoretical_gamma"] == pytest.approx(1 / 96)
    assert read_series(tmp_path / "diffusion.csv").names[0] == "mass"


def test_run_paired_and_decay_fit(tmp_path, capsys):
    cfg = _cfg(tmp_path, SMALL + "snapshot_dt = 0.01\nalpha = 1\n")
    assert main(["run-paired", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    s = read_series(tmp_path / "paired.csv")
    assert {"error", "entropy", "q_sq", "i1", "i2", "micro_integral"} <= set(s.names)
    assert len(s) == 11
    assert main(["decay-fit", str(tmp_path / "paired.csv"), "--column", "entropy", "--window", "0.01", "0.1"]) == 0
    assert "rate=" in capsys.readouterr().out
    assert main(["decay-fit", str(tmp_path / "paired.csv"), "--column", "nope", "--quiet"]) == 1


def test_sweep_writes_one_row_per_eps(tmp_path):
    cfg = _cfg(tmp_path, "n = 32\nnv = 32\n")
    assert main(["sweep-epsilon", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    s = read_series(tmp_path / "sweep.csv")
    assert len(s) == 5
    np.testing.assert_allclose(s["eps"], [0.4, 0.2, 0.1, 0.05, 0.025])
    assert np.all(np.diff(s["sup_error"]) < 0)
    meta = json.loads((tmp_path / "sweep.json").read_text())
    assert 0.3 < meta["fitted_exponent"] < 1.2


def test_usage_errors(tmp_path, capsys):
    bad = _cfg(tmp_path, "alpha = x\nfoo = 1\n")
    assert main(["simulate-kinetic", "--config", bad, "--quiet"]) == 1
    err = capsys.readouterr().err
    assert "line 1" in err and "line 2" in err
    assert main(["simulate-kinetic", "--config", str(tmp_path / "missing.cfg")]) == 1
    mismatch = _cfg(tmp_path, SMALL + "experiment = sweep\n", "m.cfg")
    assert main(["simulate-kinetic", "--config", mismatch, "--quiet"]) == 1
    with pytest.raises(SystemExit) as info:
        main(["no-such-command"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_numerical_failure_exit_code(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "diffusion_dt = 0.01\n")
    assert main(["simulate-diffusion", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 3
    assert (tmp_path / "failure_dump.npz").exists()


def test_invariant_violation_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(kin, "strang_step", lambda f, dt, p, maxw, return_density: (3.0 * f, density(f, p.vgrid)))
    cfg = _cfg(tmp_path, SMALL)
    assert main(["simulate-kinetic", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 2
    dump = np.load(tmp_path / "failure_dump.npz")
    assert int(dump["step"]) == 1 and dump["f"].shape == (32, 32)


def test_kinlab_out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("KINLAB_OUT", str(tmp_path / "env"))
    cfg = _cfg(tmp_path, SMALL)
    assert main(["simulate-kinetic", "--config", cfg, "--quiet"]) == 0
    assert (tmp_path / "env" / "kinetic.csv").exists()


def test_output_is_byte_identical(tmp_path):
    cfg = _cfg(tmp_path, SMALL + "amplitude = 0.3\nmicro_amplitude = 0.01\n")
    for d in ("a", "b"):
        assert main(["simulate-kinetic", "--config", cfg, "--out", str(tmp_path / d), "--seed", "3", "--quiet"]) == 0
    for name in ("kinetic.csv", "kinetic.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    proc = subprocess.run([sys.executable, "-m", "kinlab", "simulate-kinetic", "--config", cfg, "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "kinetic run" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "kinlab", "verify", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 1
