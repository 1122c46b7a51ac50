"""Paired kinetic/diffusion runs and the diffusive-limit diagnostics built on them.

The kinetic solution ``f`` is compared with ``rho_t M`` where ``rho_t`` solves
the limit equation from the same initial density. Both runs record snapshots
on the same time lattice, so every diagnostic is evaluated pointwise in time.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._backend import kernels
from .core import SimParams, discrete_maxwellian, eps0
from .diffusion import DiffusionRun, decay_rate_fit, default_dt, run_diffusion
from .kinetic import KineticRun, run_kinetic, step_schedule
from .moments import density, flux
from .series import DiagnosticSeries
from .spectral import grad, l2_sq


def cosine_profile(amplitude: float = 0.5, mode: int = 1):
    """``x -> 1 + a cos(2 pi mode x)`` as a callable."""
    return lambda x: 1.0 + amplitude * np.cos(2.0 * np.pi * mode * x)


def micro_perturbation(params: SimParams, norm: float, maxw=None) -> np.ndarray:
    """``c v cos(2 pi x) M`` scaled so its ``L2(M^-1)`` norm equals ``norm``.

    Its density vanishes, so it only perturbs the microscopic part.
    """
    if maxw is None:
        maxw = discrete_maxwellian(params.vgrid)
    x, v = params.grid.x, params.vgrid.v
    p = np.cos(2 * np.pi * x)[:, None] * (v * maxw)[None, :]
    size = math.sqrt(float(np.sum(p * p / maxw) * params.grid.dx * params.vgrid.dv))
    return p * (norm / size)


@dataclass
class PairedRun:
    kin: KineticRun
    dif: DiffusionRun
    times: np.ndarray
    error_series: DiagnosticSeries
    entropy_series: DiagnosticSeries
    micro_time_integral: np.ndarray
    eps_prime: float
    diffusion_states: list = field(default_factory=list)
    report: DiagnosticSeries | None = None

    @property
    def sup_error(self) -> float:
        return float(np.max(self.error_series["error"]))


def _paired_rows(f, rho_t, params, maxw, alpha):
    """Error, entropy and the relative-entropy dissipation terms at one snapshot."""
    dx, dv, eps = params.grid.dx, params.vgrid.dv, params.eps
    d = f - rho_t[:, None] * maxw[None, :]
    err_sq = float(np.sum(d * d / maxw) * dx * dv)
    h = f / maxw
    ent = float(np.sum((h - rho_t[:, None]) ** 2 * maxw) * dx * dv)
    rho, j = density(f, params.vgrid), flux(f, params.vgrid)
    g = f - rho[:, None] * maxw[None, :]
    micro = float(np.sum(g * g / maxw) * dx * dv)
    drt = grad(rho_t)
    q = rho ** (alpha / 2) * j / eps + rho_t ** (-alpha / 2) * drt
    r = grad(rho) + rho ** alpha * j / eps
    z = rho / rho_t
    i1 = 0.25 * float(np.mean((1 - z ** alpha) ** 2 * rho ** (-alpha) * drt ** 2))
    i2 = float(np.mean((1 - z ** (alpha / 2)) ** 2 * (rho * rho_t) ** (-alpha / 2) * drt ** 2))
    # what the proof bounds I1, I2 by: Lipschitz constants of z^a on the observed range
    zlo, zhi = float(z.min()), float(z.max())

    def lip(a):
        return abs(a) * max(zlo ** (a - 1), zhi ** (a - 1))

    sq = float(np.mean((rho - rho_t) ** 2))
    w = 1.0 / float(rho_t.min()) ** 2
    k1 = 0.25 * float(np.max(rho ** (-alpha) * drt ** 2)) * lip(alpha) ** 2 * w
    k2 = float(np.max((rho * rho_t) ** (-alpha / 2) * drt ** 2)) * lip(alpha / 2) ** 2 * w
    return {
        "err_sq": err_sq, "ent": ent, "micro": micro,
        "q_sq": l2_sq(q), "i1": i1, "i2": i2,
        "r_term": float(np.mean(r * rho_t ** (-alpha) * drt)),
        "i1_bound": k1 * sq, "i2_bound": k2 * sq, "density_gap_sq": sq,
    }


def run_paired(
    params: SimParams,
    rho_in=None,
    eps_prime: float = 0.0,
    *,
    snapshot_dt: float | None = None,
    diffusion_dt: float | None = None,
    report: bool = True,
    record_states: bool = False,
) -> PairedRun:
    """Run both solvers from ``rho_in M + perturbation`` and ``rho_in``.

    ``rho_in`` is a callable of ``x`` (default ``1 + 0.5 cos 2 pi x``) or an
    array on the grid. ``eps_prime > 0`` adds :func:`micro_perturbation` of
    that norm. Snapshots default to every kinetic step.
    """
    grid, vgrid, alpha = params.grid, params.vgrid, params.alpha
    maxw = discrete_maxwellian(vgrid)
    if rho_in is None:
        rho_in = cosine_profile(0.5)
    r0 = np.asarray(rho_in(grid.x) if callable(rho_in) else rho_in, dtype=float)
    if r0.shape != (grid.n,):
        raise ValueError(f"initial density has shape {r0.shape}, expected ({grid.n},)")
    if r0.min() < 1 / params.bigA or r0.max() > params.bigA:
        raise ValueError(f"initial density leaves [1/A, A]: [{r0.min():.6g}, {r0.max():.6g}]")
    if eps_prime < 0:
        raise ValueError("eps_prime must be nonnegative")
    f_in = r0[:, None] * maxw[None, :]
    if eps_prime > 0:
        f_in = f_in + micro_perturbation(params, eps_prime, maxw)
    d = f_in - r0[:, None] * maxw[None, :]
    achieved = math.sqrt(float(np.sum(d * d / maxw) * grid.dx * vgrid.dv))

    if snapshot_dt is None:
        snapshot_dt = step_schedule(params.t_end, params.dt)[0]
    if diffusion_dt is None:
        diffusion_dt = default_dt(alpha, params.bigA, grid.dx)
    dif = run_diffusion(r0, alpha, params.bigA, grid, params.t_end, diffusion_dt,
                        snapshot_dt=snapshot_dt, record_states=True)
    rows = []
    k = [0]

    def on_snapshot(t, f):
        rows.append(_paired_rows(f, dif.states[k[0]], params, maxw, alpha))
        k[0] += 1

    # the sandwich is a hypothesis on the data; the run re-checks it every step
    kin = run_kinetic(params, f_in, snapshot_dt=snapshot_dt, on_snapshot=on_snapshot,
                      record_states=record_states)
    times = kin.diagnostics.times
    if len(times) != len(dif.diagnostics) or not np.array_equal(times, dif.diagnostics.times):
        raise RuntimeError("kinetic and diffusion snapshot times differ")

    err = DiagnosticSeries()
    ent = DiagnosticSeries()
    for t, row in zip(times, rows):
        err.append(t, error=math.sqrt(row["err_sq"]), error_sq=row["err_sq"])
        ent.append(t, entropy=row["ent"], micro=row["micro"])
    micro = ent["micro"]
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (micro[1:] + micro[:-1]) * np.diff(times))])
    rep = None
    if report:
        rep = DiagnosticSeries()
        rcum = 0.0
        for i, (t, row) in enumerate(zip(times, rows)):
            if i:
                rcum += 0.5 * (row["r_term"] + rows[i - 1]["r_term"]) * (t - times[i - 1])
            rep.append(t, q_sq=row["q_sq"], i1=row["i1"], i2=row["i2"], r_term=row["r_term"],
                       r_term_integral=rcum, i1_bound=row["i1_bound"], i2_bound=row["i2_bound"],
                       entropy=row["ent"])
    return PairedRun(kin, dif, times, err, ent, cum, achieved,
                     dif.states if record_states else [], rep)


def micro_dissipation_budget(run: PairedRun) -> float:
    """Trapezoid ``int_0^T ||h - rho||^2_{L2(M)} dt`` over the run."""
    return float(run.micro_time_integral[-1])


def entropy_dissipation_report(run: PairedRun) -> DiagnosticSeries:
    """Per-snapshot ``||Q||^2``, ``I1``, ``I2``, ``int R rho_t^-alpha d_x rho_t`` and bounds.

    ``i1_bound`` and ``i2_bound`` are the Lipschitz/Jensen estimates of ``I1``
    and ``I2`` by ``K' ||rho - rho_t||^2`` with ``K'`` taken from the
    observed ranges of ``rho``, ``rho_t`` and ``d_x rho_t``.
    """
    if run.report is None:
        raise ValueError("run was made with report=False")
    return run.report


def identity_defect(run: PairedRun) -> float:
    """Largest relative gap between the two coordinates of the same distance."""
    a = run.error_series["error_sq"]
    b = run.entropy_series["entropy"]
    # roundoff floor, in units of the squared mass, for snapshots where the distance itself is zero
    scale = np.maximum(np.maximum(a, b), 1e-16 * run.kin.mass0 ** 2)
    return float(np.max(np.abs(a - b) / scale))


def hilbert_residual(run: PairedRun, params: SimParams) -> DiagnosticSeries:
    """Compare ``f - rho M`` with the first-order corrector ``-eps v M rho_t^-alpha d_x rho_t``.

    Needs ``record_states=True``. Reported relative to ``eps``; no rate is claimed.
    """
    if not run.kin.states or not run.diffusion_states:
        raise ValueError("run_paired(..., record_states=True) is required")
    vgrid, grid = params.vgrid, params.grid
    maxw = discrete_maxwellian(vgrid)
    out = DiagnosticSeries()
    for t, f, rt in zip(run.times, run.kin.states, run.diffusion_states):
        g = f - density(f, vgrid)[:, None] * maxw[None, :]
        corr = -params.eps * (rt ** (-params.alpha) * grad(rt))[:, None] * (vgrid.v * maxw)[None, :]
        d = g - corr
        res = math.sqrt(float(np.sum(d * d / maxw) * grid.dx * vgrid.dv))
        out.append(t, residual=res, residual_over_eps=res / params.eps)
    return out


# -- epsilon sweep ------------------------------------------------------------------


@dataclass
class SweepResult:
    eps_values: list
    sup_errors: list
    fitted_exponent: float
    fitted_prefactor: float
    horizons: list
    eps_primes: list
    kappa: float
    budgets: list
    monotone: bool
    flags: list = field(default_factory=list)

    def table(self) -> DiagnosticSeries:
        """One row per epsilon, indexed by ``t`` = row number."""
        out = DiagnosticSeries()
        for i, e in enumerate(self.eps_values):
            out.append(float(i), eps=e, eps_prime=self.eps_primes[i], horizon=self.horizons[i],
                       sup_error=self.sup_errors[i], micro_budget=self.budgets[i])
        return out


def fit_power_law(x, y):
    """Least squares ``log y = p log x + log c``; returns ``(p, c)``."""
    p, logc = np.polyfit(np.log(x), np.log(y), 1)
    return float(p), float(math.exp(logc))


def _sweep_one(args):
    params, rho_in, eps_prime, snapshot_dt = args
    run = run_paired(params, rho_in, eps_prime, snapshot_dt=snapshot_dt, report=False)
    return run.sup_error, micro_dissipation_budget(run)


def kinetic_rate(params: SimParams, rho_in=None, t_end: float = 0.5) -> float:
    """Fitted decay rate of ``||f - M||^2`` from the well-prepared kinetic run."""
    from .hypocoercivity import fit_window

    maxw = discrete_maxwellian(params.vgrid)
    if rho_in is None:
        rho_in = cosine_profile(0.5)
    r0 = np.asarray(rho_in(params.grid.x) if callable(rho_in) else rho_in, dtype=float)
    run = run_kinetic(replace(params, t_end=t_end), r0[:, None] * maxw[None, :])
    s = run.diagnostics
    t0, t1 = fit_window(s, "l2_sq", 1e-12)
    rate, _, _ = decay_rate_fit(s.times, s["l2_sq"], (t0, t1))
    return rate


def epsilon_sweep(
    base: SimParams,
    eps_list=(0.4, 0.2, 0.1, 0.05, 0.025),
    eps_prime_policy: str = "well-prepared",
    *,
    rho_in=None,
    t_floor: float = 0.25,
    kappa: float | None = None,
    workers: int = 1,
) -> SweepResult:
    """Sup-in-time error for each ``eps`` and a power-law fit in ``eps + eps'``.

    Each run reaches ``max(t_floor, -kappa log(eps + eps'))``. ``kappa`` defaults
    to ``1 / (2 C)`` with ``C`` the fitted kinetic rate of the largest ``eps``.
    ``eps_prime_policy`` is ``"well-prepared"`` (``eps' = 0``) or ``"micro"``
    (``eps' = eps`` through :func:`micro_perturbation`).
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    cap = min(eps0(base.alpha, base.bigA), 0.5)
    if eps_list[-1] <= 0 or eps_list[0] >= cap:
        raise ValueError(f"eps values must lie in (0, {cap:g})")
    if eps_prime_policy not in ("well-prepared", "micro"):
        raise ValueError(f"unknown eps_prime policy {eps_prime_policy!r}")
    primes = [0.0 if eps_prime_policy == "well-prepared" else e for e in eps_list]
    if kappa is None:
        kappa = 1.0 / (2.0 * kinetic_rate(replace(base, eps=eps_list[0]), rho_in))
    jobs, horizons = [], []
    for e, ep in zip(eps_list, primes):
        horizon = max(t_floor, -kappa * math.log(e + ep))
        p = replace(base, eps=e, t_end=horizon)
        horizons.append(horizon)
        jobs.append((p, rho_in, ep, None))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    sup_errors = [r[0] for r in results]
    budgets = [r[1] for r in results]
    flags = []
    monotone = all(b < a for a, b in zip(sup_errors, sup_errors[1:]))
    if not monotone:
        flags.append("sup errors are not strictly decreasing in eps")
    xs = [e + ep for e, ep in zip(eps_list, primes)]
    p, c = fit_power_law(xs, sup_errors)
    return SweepResult(eps_list, sup_errors, p, c, horizons, primes, kappa, budgets, monotone, flags)


# -- long-time closure in the linear case ----------------------------------------------


def linear_error_decay(params: SimParams, rho_in=None, t_end: float = 4.0, snapshot_dt: float = 0.05,
                       diffusion_dt: float | None = None) -> DiagnosticSeries:
    """``log ||f - rho_t M||`` for ``alpha = 0`` far below double precision.

    For ``alpha = 0`` both equations are linear, so the deviations
    ``u = f - M`` and ``w = rho_t - 1`` follow the same discrete steps as the
    full solutions. They are advanced with the solver kernels, their common
    mean is projected out and both are rescaled by one factor whenever they
    shrink, with the factor kept in ``log_scale``. The reported ``log_error``
    equals ``log`` of the full-run error, which itself drops below roundoff
    after ``t ~ 1``.
    """
    if params.alpha != 0:
        raise ValueError("the rescaled deviation mode needs the linear case alpha = 0")
    grid, vgrid = params.grid, params.vgrid
    maxw = discrete_maxwellian(vgrid)
    if rho_in is None:
        rho_in = cosine_profile(0.5)
    r0 = np.asarray(rho_in(grid.x) if callable(rho_in) else rho_in, dtype=float)
    mean = float(r0.mean())
    w = r0 - mean
    u = w[:, None] * maxw[None, :]
    dt, nsteps, per = step_schedule(t_end, params.dt, snapshot_dt)
    if diffusion_dt is None:
        diffusion_dt = default_dt(0.0, params.bigA, grid.dx)
    ddt, dsteps, dper = step_schedule(t_end, diffusion_dt, snapshot_dt)
    half = vgrid.v * (0.5 * dt / (params.eps * grid.dx))
    decay = math.exp(-dt / params.eps ** 2)
    ratio = ddt / grid.dx ** 2
    log_scale = 0.0
    out = DiagnosticSeries()

    def record(m):
        d = u - w[:, None] * maxw[None, :]
        e = math.sqrt(float(np.sum(d * d / maxw) * grid.dx * vgrid.dv))
        un = math.sqrt(float(np.sum(u * u / maxw) * grid.dx * vgrid.dv))
        out.append(m * snapshot_dt, log_error=log_scale + math.log(e) if e > 0 else -math.inf,
                   log_kinetic=log_scale + math.log(un) if un > 0 else -math.inf)

    record(0)
    for m in range(1, nsteps // per + 1):
        for _ in range(per):
            u = kernels.transport_rows(u, half)
            u = kernels.relax_toward(u, maxw, density(u, vgrid), np.full(grid.n, decay))
            u = kernels.transport_rows(u, half)
            u -= density(u, vgrid).mean() * maxw
        for _ in range(dper):
            w = kernels.diffusion_step(w, 0.0, ratio)
            w -= w.mean()
        s = math.sqrt(float(np.sum(u * u / maxw) * grid.dx * vgrid.dv))
        if s > 0:
            u, w = u / s, w / s
            log_scale += math.log(s)
        record(m)
    return out
