import math

import numpy as np
import pytest

from kinlab.asymptotics import (cosine_profile, entropy_dissipation_report, epsilon_sweep, fit_power_law,
                                hilbert_residual, identity_defect, linear_error_decay, micro_dissipation_budget,
                                micro_perturbation, run_paired)
from kinlab.core import SimParams, TorusGrid, VelocityGrid, discrete_maxwellian
from kinlab.moments import density


def _params(**kw):
    base = dict(alpha=0.0, bigA=2.0, eps=0.1, grid=TorusGrid(64), vgrid=VelocityGrid(64), t_end=0.25)
    base.update(kw)
    return SimParams(**base)


def test_equilibrium_gives_zero_error():
    run = run_paired(_params(), lambda x: np.ones_like(x))
    assert run.sup_error < 1e-14
    assert micro_dissipation_budget(run) < 1e-28
    assert identity_defect(run) <= 1e-12


@pytest.mark.parametrize("alpha", [-1.0, 0.0, 1.0])
def test_identity_between_error_and_entropy(alpha):
    run = run_paired(_params(alpha=alpha), cosine_profile(0.3), 0.01)
    assert identity_defect(run) <= 1e-12
    assert run.eps_prime == pytest.approx(0.01, rel=1e-12)


def test_well_prepared_start_and_eps_halving():
    sups = []
    for eps in (0.2, 0.1, 0.05):
        run = run_paired(_params(eps=eps))
        assert run.error_series["error"][0] < 1e-14
        sups.append(run.sup_error)
    assert sups[0] > sups[1] > sups[2]


def test_micro_budget_scales_like_eps_squared():
    budgets = []
    for eps in (0.2, 0.1):
        run = run_paired(_params(eps=eps), snapshot_dt=0.005)
        assert np.all(np.diff(run.micro_time_integral) >= 0)
        budgets.append(micro_dissipation_budget(run))
    assert 2.0 <= budgets[0] / budgets[1] <= 6.0


@pytest.mark.parametrize("alpha", [-1.0, 1.0])
def test_dissipation_terms_within_bounds(alpha):
    rep = entropy_dissipation_report(run_paired(_params(alpha=alpha), snapshot_dt=0.01))
    for name in ("q_sq", "i1", "i2"):
        assert np.all(rep[name] >= 0)
    assert np.all(rep["i1"] <= rep["i1_bound"] * (1 + 1e-12) + 1e-300)
    assert np.all(rep["i2"] <= rep["i2_bound"] * (1 + 1e-12) + 1e-300)


def test_linear_case_has_no_nonlinear_terms():
    rep = entropy_dissipation_report(run_paired(_params(), snapshot_dt=0.05))
    assert np.all(rep["i1"] == 0) and np.all(rep["i2"] == 0)


def test_report_and_states_are_optional():
    run = run_paired(_params(), report=False)
    with pytest.raises(ValueError):
        entropy_dissipation_report(run)
    with pytest.raises(ValueError):
        hilbert_residual(run, _params())


def test_hilbert_corrector_captures_micro_part():
    p = _params(alpha=1.0, eps=0.05)
    run = run_paired(p, snapshot_dt=0.05, record_states=True)
    res = hilbert_residual(run, p)
    # past the initial layer the corrector accounts for most of f - rho M
    assert res["residual_over_eps"][-1] < 0.5 * math.sqrt(run.entropy_series["micro"][-1]) / p.eps


def test_bad_initial_data():
    with pytest.raises(ValueError):
        run_paired(_params(), cosine_profile(0.9))
    with pytest.raises(ValueError):
        run_paired(_params(), np.ones(3))
    with pytest.raises(ValueError):
        run_paired(_params(), eps_prime=-1.0)


def test_micro_perturbation():
    p = _params()
    m = discrete_maxwellian(p.vgrid)
    g = micro_perturbation(p, 0.03, m)
    assert math.sqrt(np.sum(g * g / m) * p.grid.dx * p.vgrid.dv) == pytest.approx(0.03, rel=1e-12)
    assert np.abs(density(g, p.vgrid)).max() < 1e-17


def test_linear_mode_matches_direct_error():
    p = _params(t_end=0.5)
    direct = run_paired(p, snapshot_dt=0.05, report=False)
    lin = linear_error_decay(p, t_end=0.5, snapshot_dt=0.05)
    np.testing.assert_allclose(lin.times, direct.times, atol=1e-14)
    e = direct.error_series["error"][1:5]
    np.testing.assert_allclose(np.exp(lin["log_error"][1:5]), e, rtol=1e-6)
    with pytest.raises(ValueError):
        linear_error_decay(_params(alpha=1.0))


def test_linear_mode_decays_exponentially():
    lin = linear_error_decay(_params(), t_end=3.0)
    t, y = lin.times[10:], lin["log_error"][10:]
    slope = np.polyfit(t, y, 1)[0]
    # far below roundoff of the full solution
    assert y[-1] < math.log(1e-20)
    assert np.all(np.diff(y) < 0) and slope < -1.0


def test_fit_power_law():
    x = np.array([0.4, 0.2, 0.1])
    p, c = fit_power_law(x, 3 * x ** 1.5)
    assert p == pytest.approx(1.5) and c == pytest.approx(3.0)


def test_sweep_validation():
    base = _params()
    with pytest.raises(ValueError):
        epsilon_sweep(base, (0.1, 0.2))
    with pytest.raises(ValueError):
        epsilon_sweep(base, (0.6, 0.2))
    with pytest.raises(ValueError):
        epsilon_sweep(base, (0.2, 0.1), "bogus")


def test_micro_policy_records_eps_prime():
    base = _params(bigA=4.0)
    res = epsilon_sweep(base, (0.04, 0.02), "micro", rho_in=cosine_profile(0.2), kappa=0.01)
    assert res.eps_primes == [0.04, 0.02]
    assert res.horizons == [0.25, 0.25]
    # c v M with c = sqrt(2) eps reaches past the sandwich when eps is large
    with pytest.raises(ValueError, match="sandwich"):
        epsilon_sweep(base, (0.2, 0.1), "micro", rho_in=cosine_profile(0.2), kappa=0.01)


@pytest.mark.slow
def test_exponent_is_grid_robust():
    exps = []
    for n, beta in ((128, 0.5), (256, 0.25)):
        base = SimParams(alpha=0.0, bigA=2.0, grid=TorusGrid(n), vgrid=VelocityGrid(128), beta_rel=beta)
        res = epsilon_sweep(base, (0.4, 0.2, 0.1))
        assert res.monotone
        exps.append(res.fitted_exponent)
    assert abs(exps[0] - exps[1]) < 0.02
