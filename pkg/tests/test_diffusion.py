import math

import numpy as np
import pytest

import kinlab.diffusion as dif
from kinlab.core import TorusGrid, cosine_density
from kinlab.diffusion import (cfl_limit, decay_rate_fit, default_dt, diffusion_step, discrete_mode_factor,
                              dissipation, face_mobility, run_diffusion)
from kinlab.errors import InvariantViolation, NumericalFailure


def test_face_mobility_constant():
    np.testing.assert_allclose(face_mobility(np.full(8, 2.0), 1.0), 0.5)


def test_default_dt_respects_cfl():
    g = TorusGrid(64)
    for alpha in (-1.0, 0.0, 1.0):
        rho = cosine_density(g, 0.5)
        assert default_dt(alpha, 2.0, g.dx) < cfl_limit(rho, alpha, g.dx)


def test_linear_case_matches_mode_factor(kernels):
    g = TorusGrid(64)
    dt = 0.4 * g.dx ** 2
    rho = cosine_density(g, 0.1)
    for _ in range(200):
        rho = diffusion_step(rho, dt, 0.0, g)
    expected = 1.0 + 0.1 * discrete_mode_factor(dt, g.dx) ** 200 * np.cos(2 * np.pi * g.x)
    np.testing.assert_allclose(rho, expected, atol=1e-14)


def test_refuses_cfl_violation_and_negative_density():
    g = TorusGrid(32)
    rho = cosine_density(g, 0.5)
    with pytest.raises(NumericalFailure, match="CFL"):
        diffusion_step(rho, 2 * cfl_limit(rho, 1.0, g.dx), 1.0, g)
    with pytest.raises(NumericalFailure, match="nonpositive"):
        diffusion_step(rho - 1.0, 1e-6, 1.0, g)


def test_mass_over_many_steps(kernels):
    g = TorusGrid(16)
    dt = default_dt(1.0, 2.0, g.dx)
    run = run_diffusion(cosine_density(g, 0.5), 1.0, 2.0, g, 1e5 * dt, stride=10000)
    assert round(run.t_end / run.dt) == 100000
    assert run.mass_drift < 1e-12


def test_maximum_principle_violation_is_reported(monkeypatch):
    g = TorusGrid(16)
    monkeypatch.setattr(dif, "diffusion_step", lambda rho, dt, alpha, grid: rho * 1.01)
    with pytest.raises(InvariantViolation) as info:
        run_diffusion(cosine_density(g, 0.2), 0.0, 2.0, g, 0.01)
    assert info.value.dump["step"] == 1


def test_initial_density_checks():
    g = TorusGrid(16)
    with pytest.raises(ValueError):
        run_diffusion(cosine_density(g, 0.9), 0.0, 1.5, g, 0.1)
    with pytest.raises(ValueError):
        run_diffusion(np.ones(5), 0.0, 1.5, g, 0.1)


def test_energy_identity_is_exact():
    # summation by parts: (1/2) d||rho||^2 = -dt D + (1/2) ||step||^2 with no other remainder
    g = TorusGrid(64)
    rho = cosine_density(g, 0.5)
    dt = default_dt(-1.0, 2.0, g.dx)
    new = diffusion_step(rho, dt, -1.0, g)
    lhs = 0.5 * (np.sum(new ** 2) - np.sum(rho ** 2)) * g.dx
    rhs = -dt * dissipation(rho, -1.0, g) + 0.5 * np.sum((new - rho) ** 2) * g.dx
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_exponential_decay_alpha_minus_one():
    g = TorusGrid(64)
    run = run_diffusion(cosine_density(g, 0.5), -1.0, 2.0, g, 0.5, snapshot_dt=0.01)
    rate, _, r2 = decay_rate_fit(run.diagnostics.times, run.diagnostics["l2_dev"], (0.05, 0.5))
    assert r2 > 0.999
    # mobility rho near 1 for the surviving mode
    assert rate == pytest.approx(4 * math.pi ** 2, rel=0.1)


def test_decay_rate_fit_synthetic(rng):
    t = np.linspace(0, 2, 50)
    rate, intercept, r2 = decay_rate_fit(t, 5 * np.exp(-3 * t))
    assert rate == pytest.approx(3, abs=1e-6)
    assert intercept == pytest.approx(math.log(5), abs=1e-9) and r2 == pytest.approx(1.0)
    noisy = np.exp(-3 * t) * (1 + 0.01 * rng.standard_normal(t.size))
    assert decay_rate_fit(t, noisy)[0] == pytest.approx(3, abs=0.02)
    rate, _, r2 = decay_rate_fit(t, np.full(t.size, 2.0))
    assert rate == pytest.approx(0.0, abs=1e-12) and r2 == 1.0
    with pytest.raises(ValueError):
        decay_rate_fit(t[:5], np.exp(-t[:5]))
    with pytest.raises(ValueError):
        decay_rate_fit(t, -np.exp(-t))
