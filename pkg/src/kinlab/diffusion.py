"""Explicit conservative solver for ``d_t rho = d_x (rho^{-alpha} d_x rho)`` on the torus."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .core import TorusGrid
from .errors import InvariantViolation, NumericalFailure
from .series import DiagnosticSeries


def face_mobility(rho, alpha: float) -> np.ndarray:
    """Arithmetic mean of ``rho^{-alpha}`` across face ``i + 1/2``."""
    mob = np.asarray(rho) ** (-alpha)
    return 0.5 * (mob + np.roll(mob, -1))


def cfl_limit(rho, alpha: float, dx: float) -> float:
    return dx * dx / (2.0 * float(np.max(face_mobility(rho, alpha))))


def default_dt(alpha: float, bigA: float, dx: float) -> float:
    """``0.4 dx^2`` divided by the largest mobility allowed on ``[1/A, A]``."""
    return 0.4 * dx * dx * min(bigA ** alpha, bigA ** (-alpha))


def diffusion_step(rho, dt: float, alpha: float, grid: TorusGrid) -> np.ndarray:
    rho = np.ascontiguousarray(rho, dtype=float)
    if not np.all(rho > 0.0):
        raise NumericalFailure(f"nonpositive density (min {rho.min():.3e})", {"rho": rho})
    limit = cfl_limit(rho, alpha, grid.dx)
    if dt > limit * (1.0 + 1e-12):
        raise NumericalFailure(f"CFL violated: dt={dt:.6g} > {limit:.6g}", {"rho": rho, "dt": dt})
    return kernels.diffusion_step(rho, float(alpha), dt / grid.dx ** 2)


def dissipation(rho, alpha: float, grid: TorusGrid) -> float:
    """Discrete ``int rho^{-alpha} |d_x rho|^2 dx`` in face form.

    This is the exact summation-by-parts partner of the flux-form step.
    """
    rho = np.asarray(rho)
    d = (np.roll(rho, -1) - rho) / grid.dx
    return float(np.sum(face_mobility(rho, alpha) * d * d) * grid.dx)


@dataclass
class DiffusionRun:
    alpha: float
    bigA: float
    grid: TorusGrid
    dt: float
    t_end: float
    state: np.ndarray
    diagnostics: DiagnosticSeries
    mass0: float
    states: list

    @property
    def mass_drift(self) -> float:
        return float(np.max(np.abs(self.diagnostics["mass"] - self.mass0)) / abs(self.mass0))


def run_diffusion(
    rho_in,
    alpha: float,
    bigA: float,
    grid: TorusGrid,
    t_end: float,
    dt: float | None = None,
    *,
    stride: int = 1,
    snapshot_dt: float | None = None,
    record_states: bool = False,
    check_bounds: bool = True,
    slack: float = 1e-12,
) -> DiffusionRun:
    """Advance ``rho_in`` to ``t_end``, asserting the maximum principle every step."""
    from .kinetic import step_schedule

    rho = np.array(rho_in, dtype=float)
    if rho.shape != (grid.n,):
        raise ValueError(f"initial density has shape {rho.shape}, expected ({grid.n},)")
    if check_bounds and (rho.min() < (1 - slack) / bigA or rho.max() > bigA * (1 + slack)):
        raise ValueError(f"initial density leaves [1/A, A]: [{rho.min():.6g}, {rho.max():.6g}]")
    if dt is None:
        dt = default_dt(alpha, bigA, grid.dx)
    dt, nsteps, stride = step_schedule(t_end, dt, snapshot_dt, stride)
    lo, hi = rho.min(), rho.max()
    mass0 = float(rho.sum() * grid.dx)
    series = DiagnosticSeries()
    states = []

    def record(t, rho):
        series.append(
            t,
            mass=float(rho.sum() * grid.dx),
            rho_min=float(rho.min()),
            rho_max=float(rho.max()),
            l2_dev=float(np.sqrt(np.sum((rho - 1.0) ** 2) * grid.dx)),
            dissipation=dissipation(rho, alpha, grid),
        )
        if record_states:
            states.append(rho.copy())

    record(0.0, rho)
    for k in range(1, nsteps + 1):
        rho = diffusion_step(rho, dt, alpha, grid)
        new_lo, new_hi = rho.min(), rho.max()
        tol = slack * max(1.0, hi)
        if check_bounds and (new_lo < lo - tol or new_hi > hi + tol):
            raise InvariantViolation(
                f"maximum principle violated at step {k}: [{new_lo:.17g}, {new_hi:.17g}] vs [{lo:.17g}, {hi:.17g}]",
                {"step": k, "rho": rho},
            )
        lo, hi = new_lo, new_hi
        if k % stride == 0 or k == nsteps:
            record((k // stride) * snapshot_dt if snapshot_dt else k * dt, rho)
    return DiffusionRun(alpha, bigA, grid, dt, nsteps * dt, rho, series, mass0, states)


def decay_rate_fit(t, values, window=None):
    """Least-squares fit of ``log(values)`` against ``t``.

    Returns ``(rate, intercept, r_squared)`` with ``rate`` the negated slope.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1])
        t, y = t[mask], y[mask]
    if len(t) < 10:
        raise ValueError(f"need at least 10 samples in the fit window, got {len(t)}")
    if np.any(y <= 0.0):
        raise ValueError("nonpositive values in the fit window")
    logy = np.log(y)
    slope, intercept = np.polyfit(t, logy, 1)
    resid = logy - (slope * t + intercept)
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0.0 else 1.0
    return float(-slope), float(intercept), r2


def series_decay_fit(series: DiagnosticSeries, column: str, window=None):
    return decay_rate_fit(series.times, series[column], window)


def discrete_mode_factor(dt: float, dx: float, mode: int = 1) -> float:
    """Per-step amplitude factor of the heat stencil on ``cos(2 pi mode x)``."""
    return 1.0 - 4.0 * dt / dx ** 2 * math.sin(math.pi * mode * dx) ** 2
