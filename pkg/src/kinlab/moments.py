"""Hydrodynamic moments of a phase field and the balance laws they satisfy."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TorusGrid, VelocityGrid, discrete_maxwellian
from .errors import NumericalFailure
from .series import DiagnosticSeries
from .spectral import grad, l2_sq


@dataclass(frozen=True)
class HydroState:
    rho: np.ndarray
    j: np.ndarray
    energy: np.ndarray


def density(f, vgrid: VelocityGrid) -> np.ndarray:
    return np.asarray(f).sum(axis=1) * vgrid.dv


def flux(f, vgrid: VelocityGrid) -> np.ndarray:
    return np.asarray(f) @ vgrid.v * vgrid.dv


def energy(f, vgrid: VelocityGrid) -> np.ndarray:
    """Scalar ``int f (v^2 - 1) dv`` (the one-dimensional energy tensor)."""
    return np.asarray(f) @ (vgrid.v ** 2 - 1.0) * vgrid.dv


def hydro(f, vgrid: VelocityGrid) -> HydroState:
    return HydroState(density(f, vgrid), flux(f, vgrid), energy(f, vgrid))


def lemma21_bound_check(f, beta, vgrid: VelocityGrid, maxw=None):
    """Pointwise ``|j|``, ``|E|`` and ``(int (f/M - beta)^2 M dv)^{1/2}``.

    ``beta`` may be a scalar or a field of shape ``(n,)``. The flux bound is
    Cauchy-Schwarz against ``int v^2 M = 1``; for the energy the sharp constant
    is ``(int (v^2-1)^2 M)^{1/2} = sqrt(2)``, see :func:`energy_weight_norm`.
    """
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    f = np.asarray(f, dtype=float)
    beta = np.broadcast_to(np.asarray(beta, dtype=float), (f.shape[0],))
    d = f / maxw - beta[:, None]
    rhs = np.sqrt(np.sum(d * d * maxw, axis=1) * vgrid.dv)
    return np.abs(flux(f, vgrid)), np.abs(energy(f, vgrid)), rhs


def energy_weight_norm(vgrid: VelocityGrid, maxw=None) -> float:
    """Discrete ``(int (v^2 - 1)^2 M dv)^{1/2}``; equals sqrt(2) up to quadrature."""
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    w = vgrid.v ** 2 - 1.0
    return float(np.sqrt(np.sum(w * w * maxw) * vgrid.dv))


def moment_residuals(
    snapshots,
    dt: float,
    eps: float,
    alpha: float,
    vgrid: VelocityGrid,
    t0: float = 0.0,
) -> DiagnosticSeries:
    """L2 norms of the mass and flux balance residuals at interior snapshots.

    Time derivatives are centered differences over neighbouring snapshots,
    space derivatives are spectral.
    """
    snapshots = [np.asarray(s, dtype=float) for s in snapshots]
    if len(snapshots) < 3:
        raise ValueError(f"need at least 3 snapshots, got {len(snapshots)}")
    moms = [hydro(s, vgrid) for s in snapshots]
    out = DiagnosticSeries(["mass_residual", "flux_residual"])
    for k in range(1, len(moms) - 1):
        prev, cur, nxt = moms[k - 1], moms[k], moms[k + 1]
        r_mass = (nxt.rho - prev.rho) / (2 * dt) + grad(cur.j) / eps
        r_flux = (
            (nxt.j - prev.j) / (2 * dt)
            + grad(cur.energy) / eps
            + grad(cur.rho) / eps
            + cur.rho ** alpha * cur.j / eps ** 2
        )
        out.append(t0 + k * dt, mass_residual=np.sqrt(l2_sq(r_mass)), flux_residual=np.sqrt(l2_sq(r_flux)))
    return out


def r_eps(f, eps: float, alpha: float, vgrid: VelocityGrid) -> np.ndarray:
    """``d_x rho + rho^alpha j / eps``; vanishes in the diffusive regime."""
    rho = density(f, vgrid)
    if not np.all(rho > 0.0):
        raise NumericalFailure(f"nonpositive density (min {rho.min():.3e})")
    return grad(rho) + rho ** alpha * flux(f, vgrid) / eps


def total_mass(f, grid: TorusGrid, vgrid: VelocityGrid) -> float:
    return float(np.sum(f) * grid.dx * vgrid.dv)
