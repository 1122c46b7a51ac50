"""Micro/macro decomposition, the perturbed Lyapunov functional and decay audits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import SimParams, discrete_maxwellian, eps0
from .diffusion import decay_rate_fit
from .moments import density, flux
from .series import DiagnosticSeries
from .spectral import grad, inner, inv_helmholtz, l2_sq


def theoretical_gamma(alpha: float, bigA: float) -> float:
    """Explicit exponential rate ``1 / (8 A^alpha (2 + A^{2 alpha}))``."""
    return 1.0 / (8.0 * bigA ** alpha * (2.0 + bigA ** (2 * alpha)))


def perturbation_weight(eps: float, alpha: float, bigA: float) -> float:
    return eps / (bigA ** alpha * (2.0 + bigA ** (2 * alpha)))


def micro_projection(f, vgrid, maxw=None) -> np.ndarray:
    """``f - rho M``; its density vanishes identically."""
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    f = np.asarray(f, dtype=float)
    return f - density(f, vgrid)[:, None] * maxw[None, :]


@dataclass(frozen=True)
class LyapunovRecord:
    l2_sq: float
    perturbation: float
    functional: float
    micro: float
    macro: float
    mean_offset: float
    delta: float
    t: float = 0.0


def lyapunov(f, params: SimParams, maxw=None, t: float = 0.0) -> LyapunovRecord:
    """Assemble the functional ``||f - M||^2 + delta int j (I - Lap)^{-1} d_x rho``.

    ``macro`` is ``||rho - mean(rho)||^2`` and ``mean_offset`` is
    ``(mean(rho) - 1)^2`` so that ``l2_sq = micro + macro + mean_offset``.
    """
    grid, vgrid = params.grid, params.vgrid
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    f = np.asarray(f, dtype=float)
    rho = density(f, vgrid)
    j = flux(f, vgrid)
    dx, dv = grid.dx, vgrid.dv
    d = f - maxw
    l2 = float(np.sum(d * d / maxw) * dx * dv)
    g = f - rho[:, None] * maxw[None, :]
    micro = float(np.sum(g * g / maxw) * dx * dv)
    rbar = float(rho.mean())
    macro = l2_sq(rho - rbar)
    pert = inner(j, inv_helmholtz(grad(rho)))
    delta = perturbation_weight(params.eps, params.alpha, params.bigA)
    return LyapunovRecord(l2, pert, l2 + delta * pert, micro, macro, (rbar - 1.0) ** 2, delta, t)


@dataclass
class DecayReport:
    gamma: float
    fitted_rate: float
    r_squared: float
    max_bound_ratio: float
    max_functional_increase: float
    equivalence_ok: bool
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def fit_window(series: DiagnosticSeries, column: str = "l2_sq", floor: float = 1e-14):
    """Times where ``column`` sits above ``floor`` times its initial value."""
    y = series[column]
    keep = y > floor * y[0]
    # stop at the first sample that reaches the floor
    stop = int(np.argmin(keep)) if not keep.all() else len(y)
    return float(series.t[0]), float(series.t[max(stop - 1, 0)])


def decay_audit(series: DiagnosticSeries, params: SimParams, rel_slack: float | None = None,
                floor: float = 1e-14) -> DecayReport:
    """Check monotone functional, the ``3 exp(-gamma t)`` envelope and the fitted rate.

    Values below ``floor`` times the initial functional are roundoff and are
    compared with an absolute slack of ``rel_slack * floor * L(0)``.
    """
    if rel_slack is None:
        rel_slack = params.tol.functional_rel
    gamma = theoretical_gamma(params.alpha, params.bigA)
    t = series.times
    l2 = series["l2_sq"]
    fun = series["functional"]
    failures = []
    if l2[0] == 0.0:
        return DecayReport(gamma, np.inf, 1.0, 0.0, 0.0, True)

    envelope = 3.0 * np.exp(-gamma * t) * l2[0]
    max_bound_ratio = float(np.max(l2 / envelope))
    if max_bound_ratio > 1.0:
        failures.append(f"envelope exceeded: max ||f-M||^2 / (3 e^(-gamma t) ||f_in-M||^2) = {max_bound_ratio:.6g}")

    scale = np.maximum(fun[:-1], floor * fun[0])
    incr = (fun[1:] - fun[:-1]) / scale
    max_incr = float(incr.max()) if len(incr) else 0.0
    if max_incr > rel_slack:
        k = int(np.argmax(incr))
        failures.append(f"functional increased by {max_incr:.3e} (relative) at t={t[k + 1]:.6g}")

    equiv = True
    if params.eps <= eps0(params.alpha, params.bigA):
        pert = fun - l2
        equiv = bool(np.all(np.abs(pert) <= 0.5 * l2 + floor * l2[0]))
        if not equiv:
            failures.append("norm equivalence |delta * perturbation| <= l2_sq / 2 failed")

    t0, t1 = fit_window(series, "l2_sq", floor)
    mask = (t >= t0) & (t <= t1)
    if mask.sum() >= 10:
        rate, _, r2 = decay_rate_fit(t[mask], l2[mask])
    else:
        rate, r2 = np.nan, np.nan
    if not rate >= gamma:
        failures.append(f"fitted rate {rate:.6g} below theoretical gamma {gamma:.6g}")
    return DecayReport(gamma, float(rate), float(r2), max_bound_ratio, max_incr, equiv, failures)
