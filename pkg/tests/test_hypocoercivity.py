import numpy as np
import pytest

from kinlab.core import SimParams, TorusGrid, VelocityGrid, cosine_density, discrete_maxwellian
from kinlab.hypocoercivity import (decay_audit, fit_window, lyapunov, micro_projection, perturbation_weight,
                                   theoretical_gamma)
from kinlab.kinetic import run_kinetic
from kinlab.moments import density
from kinlab.series import DiagnosticSeries


@pytest.mark.parametrize("alpha, bigA, expected", [(0.0, 2.0, 1 / 24), (1.0, 2.0, 1 / 96), (-1.0, 2.0, 1 / 9)])
def test_gamma_values(alpha, bigA, expected):
    assert theoretical_gamma(alpha, bigA) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 0.5, 2.0])
def test_gamma_limit_at_unit_A(alpha):
    assert theoretical_gamma(alpha, 1.0 + 1e-12) == pytest.approx(1 / 24, rel=1e-9)


def test_perturbation_weight():
    assert perturbation_weight(0.1, 1.0, 2.0) == pytest.approx(0.1 / 12, rel=1e-15)


def test_micro_projection_has_zero_density(vgrid, maxw, rng):
    f = rng.uniform(0.5, 2.0, (8, vgrid.nv)) * maxw
    assert np.abs(density(micro_projection(f, vgrid, maxw), vgrid)).max() < 1e-15


def test_functional_of_cosine_density(vgrid, maxw):
    p = SimParams(grid=TorusGrid(64), vgrid=vgrid)
    f = cosine_density(p.grid, 0.5)[:, None] * maxw
    rec = lyapunov(f, p, maxw)
    assert rec.l2_sq == pytest.approx(0.125, rel=1e-12)
    assert rec.macro == pytest.approx(0.125, rel=1e-12)
    assert rec.micro < 1e-28
    # no flux, so no perturbation
    assert abs(rec.perturbation) < 1e-18
    assert rec.functional == pytest.approx(rec.l2_sq, rel=1e-15)


def test_pythagoras(vgrid, maxw, rng):
    p = SimParams(grid=TorusGrid(16), vgrid=vgrid)
    f = rng.uniform(0.5, 2.0, (16, vgrid.nv)) * maxw
    rec = lyapunov(f, p, maxw)
    assert rec.micro + rec.macro + rec.mean_offset == pytest.approx(rec.l2_sq, rel=1e-12)


def test_audit_passes_on_solver_run():
    g, vg = TorusGrid(64), VelocityGrid(64)
    p = SimParams(alpha=1.0, bigA=2.0, eps=0.25, grid=g, vgrid=vg, t_end=10.0)
    m = discrete_maxwellian(vg)
    run = run_kinetic(p, cosine_density(g, 0.5)[:, None] * m, snapshot_dt=0.05)
    rep = decay_audit(run.diagnostics, p)
    assert rep.passed, rep.failures
    assert rep.fitted_rate > rep.gamma and rep.max_bound_ratio <= 1.0 and rep.equivalence_ok


def _synthetic(values, pert=None):
    t = np.linspace(0, 10, len(values))
    values = np.asarray(values, dtype=float)
    pert = np.zeros_like(values) if pert is None else pert
    return DiagnosticSeries.from_columns(t, l2_sq=values, functional=values + pert)


def test_audit_detects_failures():
    p = SimParams(alpha=0.0, bigA=2.0, eps=0.1)
    gamma = theoretical_gamma(0.0, 2.0)
    t = np.linspace(0, 10, 50)
    slow = _synthetic(np.exp(-0.5 * gamma * t))
    rep = decay_audit(slow, p)
    assert not rep.passed
    assert any("below theoretical gamma" in msg for msg in rep.failures)
    bump = np.exp(-t)
    bump[20] = 4.0 * bump[0]
    rep = decay_audit(_synthetic(bump), p)
    assert any("envelope" in msg for msg in rep.failures)
    assert any("functional increased" in msg for msg in rep.failures)
    v = np.exp(-t)
    rep = decay_audit(_synthetic(v, 0.9 * v), p)
    assert not rep.equivalence_ok


def test_fit_window_stops_at_floor():
    t = np.linspace(0, 10, 101)
    s = DiagnosticSeries.from_columns(t, l2_sq=np.maximum(np.exp(-10 * t), 1e-30))
    t0, t1 = fit_window(s, floor=1e-14)
    assert t0 == 0.0 and t1 == pytest.approx(3.2)
