"""Strang-split solver for the diffusively scaled BGK-type equation.

Each step is ``transport(dt/2) o relax(dt) o transport(dt/2)``:

* transport shifts velocity column ``j`` by ``v_j dt / eps`` with monotone
  linear interpolation on the periodic grid (conservative, range preserving);
* relaxation solves ``d_t f = rho^alpha (rho M - f) / eps^2`` exactly, since
  it leaves ``rho`` unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .core import SimParams, TorusGrid, VelocityGrid, discrete_maxwellian
from .errors import InvariantViolation, NumericalFailure
from .moments import density, hydro, total_mass
from .series import DiagnosticSeries


def transport_step(f, dt: float, eps: float, grid: TorusGrid, vgrid: VelocityGrid) -> np.ndarray:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return kernels.transport_rows(np.ascontiguousarray(f, dtype=float), vgrid.v * (dt / (eps * grid.dx)))


def relaxation_step(f, dt: float, eps: float, alpha: float, vgrid: VelocityGrid, maxw=None) -> np.ndarray:
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    f = np.asarray(f, dtype=float)
    rho = density(f, vgrid)
    if not np.all(rho > 0.0):
        raise NumericalFailure(f"nonpositive density (min {rho.min():.3e}) in relaxation", {"f": f})
    return kernels.relax_toward(f, maxw, rho, np.exp(-(rho ** alpha) * (dt / eps ** 2)))


def strang_step(f, dt: float, params: SimParams, maxw=None, return_density=False):
    """Advance one step; optionally also return the density the relaxation used."""
    if maxw is None:
        maxw = discrete_maxwellian(params.vgrid)
    half = params.vgrid.v * (0.5 * dt / (params.eps * params.grid.dx))
    g, rho = kernels.strang_step(
        np.ascontiguousarray(f, dtype=float), maxw, params.vgrid.dv, half, float(params.alpha), dt / params.eps ** 2
    )
    if not np.all(rho > 0.0):
        raise NumericalFailure(f"nonpositive density (min {rho.min():.3e}) in relaxation", {"f": np.asarray(f)})
    return (g, rho) if return_density else g


def step_schedule(t_end: float, dt_max: float, snapshot_dt: float | None = None, stride: int = 1):
    """Return ``(dt, nsteps, stride)`` landing exactly on ``t_end``.

    With ``snapshot_dt`` the step is shrunk so each snapshot interval holds a
    whole number of steps, and ``t_end`` is rounded to a whole number of
    intervals.
    """
    if snapshot_dt is None:
        nsteps = max(1, math.ceil(t_end / dt_max - 1e-9))
        return t_end / nsteps, nsteps, stride
    per = max(1, math.ceil(snapshot_dt / dt_max - 1e-9))
    nsnap = max(1, round(t_end / snapshot_dt))
    return snapshot_dt / per, nsnap * per, per


def check_sandwich(f, maxw, bigA: float, slack: float):
    ratio = f / maxw
    lo, hi = float(ratio.min()), float(ratio.max())
    ok = lo >= (1.0 - slack) / bigA and hi <= bigA * (1.0 + slack)
    return ok, lo, hi


@dataclass
class KineticRun:
    """State and diagnostics of a finished (or running) kinetic simulation."""

    params: SimParams
    state: np.ndarray
    t: float
    diagnostics: DiagnosticSeries
    dt: float
    stride: int
    mass0: float
    ratio_min: float = math.inf
    ratio_max: float = -math.inf
    hydro: dict = field(default_factory=dict)
    relax_densities: list = field(default_factory=list)
    states: list = field(default_factory=list)

    @property
    def mass_drift(self) -> float:
        m = self.diagnostics["mass"]
        return float(np.max(np.abs(m - self.mass0)) / abs(self.mass0))


def run_kinetic(
    params: SimParams,
    f_in,
    *,
    stride: int = 1,
    snapshot_dt: float | None = None,
    on_snapshot=None,
    functional: bool = True,
    record_hydro: bool = False,
    record_relax_density: bool = False,
    record_states: bool = False,
    check_bounds: bool = True,
) -> KineticRun:
    """Integrate from ``f_in`` to ``params.t_end``.

    ``on_snapshot(t, f)`` is called at every recorded time, including ``t = 0``.
    The sandwich ``f / M`` in ``[1/A, A]`` is checked after every step and a
    violation raises :class:`InvariantViolation` carrying the offending state.
    """
    from .hypocoercivity import lyapunov

    grid, vgrid = params.grid, params.vgrid
    maxw = discrete_maxwellian(vgrid)
    f = np.array(f_in, dtype=float)
    if f.shape != (grid.n, vgrid.nv):
        raise ValueError(f"initial data has shape {f.shape}, expected {(grid.n, vgrid.nv)}")
    slack = params.tol.sandwich_slack
    ok, lo, hi = check_sandwich(f, maxw, params.bigA, slack)
    if check_bounds and not ok:
        raise ValueError(f"initial data leaves the sandwich [1/A, A]: f/M in [{lo:.6g}, {hi:.6g}]")

    dt, nsteps, stride = step_schedule(params.t_end, params.dt, snapshot_dt, stride)
    run = KineticRun(params, f, 0.0, DiagnosticSeries(), dt, stride, total_mass(f, grid, vgrid), lo, hi)

    def record(t, f):
        mass = total_mass(f, grid, vgrid)
        row = {"mass": mass, "mass_drift": abs(mass - run.mass0) / abs(run.mass0)}
        _, lo, hi = check_sandwich(f, maxw, params.bigA, slack)
        row["ratio_min"], row["ratio_max"] = lo, hi
        if functional:
            rec = lyapunov(f, params, maxw)
            row.update(l2_sq=rec.l2_sq, perturbation=rec.perturbation, functional=rec.functional,
                       micro=rec.micro, macro=rec.macro)
        run.diagnostics.append(t, **row)
        if record_hydro:
            h = hydro(f, vgrid)
            for name, val in (("t", t), ("rho", h.rho), ("j", h.j), ("energy", h.energy)):
                run.hydro.setdefault(name, []).append(val)
        if record_states:
            run.states.append(f.copy())
        if on_snapshot is not None:
            on_snapshot(t, f)

    record(0.0, f)
    for k in range(1, nsteps + 1):
        f, rho = strang_step(f, dt, params, maxw, return_density=True)
        if record_relax_density:
            run.relax_densities.append(rho)
        ok, lo, hi = check_sandwich(f, maxw, params.bigA, slack)
        run.ratio_min, run.ratio_max = min(run.ratio_min, lo), max(run.ratio_max, hi)
        if check_bounds and not ok:
            raise InvariantViolation(
                f"sandwich violated at step {k} (t={k * dt:.6g}): f/M in [{lo:.17g}, {hi:.17g}]",
                {"step": k, "t": k * dt, "f": f},
            )
        if k % stride == 0 or k == nsteps:
            record((k // stride) * snapshot_dt if snapshot_dt else k * dt, f)
    run.state, run.t = f, nsteps * dt
    if record_hydro:
        run.hydro = {name: np.asarray(vals) for name, vals in run.hydro.items()}
    return run


# -- the linear map behind the fixed-point construction ----------------------------


def gamma_map(frozen_rho, f_in, dt: float, alpha: float, bigA: float, grid: TorusGrid,
              vgrid: VelocityGrid, eps: float = 1.0, maxw=None, slack: float = 1e-12) -> np.ndarray:
    """Solve the linear problem with relaxation rate and target frozen from ``frozen_rho``.

    ``frozen_rho[k]`` is the density used in the relaxation of step ``k``, so
    feeding the densities recorded by :func:`run_kinetic` reproduces its
    trajectory. Returns the states at all step times, shape ``(K+1, n, nv)``.
    """
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    frozen_rho = np.asarray(frozen_rho, dtype=float)
    lo, hi = frozen_rho.min(), frozen_rho.max()
    if lo < (1 - slack) / bigA or hi > bigA * (1 + slack):
        raise ValueError(f"frozen density leaves [1/A, A]: [{lo:.6g}, {hi:.6g}]")
    g = np.array(f_in, dtype=float)
    half = vgrid.v * (0.5 * dt / (eps * grid.dx))
    out = [g]
    for rho in frozen_rho:
        g = kernels.transport_rows(g, half)
        g = kernels.relax_toward(g, maxw, rho, np.exp(-(rho ** alpha) * (dt / eps ** 2)))
        g = kernels.transport_rows(g, half)
        out.append(g)
    return np.stack(out)


def contraction_constants(alpha: float, bigA: float, samples: int = 20001):
    """``(C, lambda0)`` of the Lipschitz estimate for ``lambda(z) = z^alpha`` on ``[1/A, A]``.

    ``C = ||M||_inf (sup |(z lambda)'| + A sup |lambda'|)`` with the continuous
    Gaussian peak ``(2 pi)^{-1/2}``.
    """
    z = np.geomspace(1.0 / bigA, bigA, samples)
    d_zlam = np.abs((alpha + 1.0) * z ** alpha)
    d_lam = np.abs(alpha * z ** (alpha - 1.0))
    c = (d_zlam.max() + bigA * d_lam.max()) / math.sqrt(2.0 * math.pi)
    return float(c), float((z ** alpha).min())


def contraction_factor(alpha: float, bigA: float, T: float) -> float:
    c, lam0 = contraction_constants(alpha, bigA)
    return c / lam0 * (1.0 - math.exp(-lam0 * T))


def _random_density(rng, grid_x, times, bigA, modes=3):
    """Smooth random ``rho(t, x)`` valued inside ``[1/A, A]``."""
    lo0, hi0 = 1.0 / bigA, bigA
    a, b = np.sort(rng.uniform(lo0, hi0, 2))
    amp = rng.uniform(0.2, 1.0, modes)
    k = rng.integers(1, 4, modes)
    omega = rng.uniform(-20.0, 20.0, modes)
    phase = rng.uniform(0.0, 2 * np.pi, modes)
    s = sum(amp[m] * np.cos(2 * np.pi * k[m] * grid_x[None, :] + omega[m] * times[:, None] + phase[m])
            for m in range(modes)) / amp.sum()
    return a + (b - a) * 0.5 * (1.0 + s)


@dataclass(frozen=True)
class ContractionReport:
    measured: float
    factor: float
    ratios: tuple
    constant: float
    lambda0: float

    @property
    def passed(self) -> bool:
        return self.measured < 1.0 and self.measured <= 1.1 * self.factor


def contraction_audit(alpha: float, bigA: float, T: float, trials: int, grid: TorusGrid,
                      vgrid: VelocityGrid, rng: np.random.Generator, dt: float | None = None,
                      eps: float = 1.0) -> ContractionReport:
    """Largest observed ``||G(f1) - G(f2)||_V / ||f1 - f2||_V`` over random pairs in V.

    Each trial draws ``f_k(t, x, v) = rho_k(t, x) M(v)`` with smooth random
    densities in ``[1/A, A]`` and a shared random initial datum; the V norm is
    the sup over time of the L1 norm in ``(x, v)``.
    """
    maxw = discrete_maxwellian(vgrid)
    if dt is None:
        dt = min(0.5 * eps ** 2, 0.5 * grid.dx)
    nsteps = max(1, math.ceil(T / dt - 1e-9))
    dt = T / nsteps
    t_steps = np.arange(nsteps + 1) * dt
    t_mid = (np.arange(nsteps) + 0.5) * dt
    t_all = np.sort(np.concatenate([t_steps, t_mid]))
    cell = grid.dx * vgrid.dv
    ratios = []
    for _ in range(trials):
        seeds = rng.integers(0, 2 ** 63, 3)
        r_in = _random_density(np.random.default_rng(seeds[0]), grid.x, np.zeros(1), bigA)[0]
        f_in = r_in[:, None] * maxw[None, :]
        rho1 = _random_density(np.random.default_rng(seeds[1]), grid.x, t_all, bigA)
        rho2 = _random_density(np.random.default_rng(seeds[2]), grid.x, t_all, bigA)
        denom = np.max(np.abs(rho1 - rho2).sum(axis=1)) * grid.dx * float(maxw.sum() * vgrid.dv)
        if denom == 0.0:
            continue
        mid = np.searchsorted(t_all, t_mid)
        g1 = gamma_map(rho1[mid], f_in, dt, alpha, bigA, grid, vgrid, eps, maxw)
        g2 = gamma_map(rho2[mid], f_in, dt, alpha, bigA, grid, vgrid, eps, maxw)
        num = np.max(np.abs(g1 - g2).sum(axis=(1, 2))) * cell
        ratios.append(num / denom)
    c, lam0 = contraction_constants(alpha, bigA)
    return ContractionReport(max(ratios), contraction_factor(alpha, bigA, T), tuple(ratios), c, lam0)
