"""Pure numpy kernels; the reference the compiled ``_kernels`` module mirrors."""
import numpy as np


def _shift_parts(shift_cells, n):
    shift_cells = np.asarray(shift_cells, dtype=float)
    m = np.floor(shift_cells)
    theta = shift_cells - m
    i = np.arange(n)[:, None]
    i0 = (i - m.astype(np.int64)[None, :]) % n
    i1 = (i0 - 1) % n
    return i0, i1, theta


def transport_rows(f, shift_cells):
    """Shift column ``j`` of ``f`` by ``shift_cells[j]`` cells with linear interpolation."""
    i0, i1, theta = _shift_parts(shift_cells, f.shape[0])
    return (1.0 - theta) * np.take_along_axis(f, i0, axis=0) + theta * np.take_along_axis(f, i1, axis=0)


def relax_toward(f, maxw, rho, decay):
    eq = rho[:, None] * maxw[None, :]
    return eq + (f - eq) * decay[:, None]


def density(f, dv):
    return f.sum(axis=1) * dv


def strang_step(f, maxw, dv, half_shift_cells, alpha, rate_dt):
    """One transport/relax/transport step; returns the new state and the relaxation density."""
    g = transport_rows(f, half_shift_cells)
    rho = density(g, dv)
    if not np.all(rho > 0.0):
        return g, rho
    g = relax_toward(g, maxw, rho, np.exp(-(rho ** alpha) * rate_dt))
    return transport_rows(g, half_shift_cells), rho


def diffusion_step(rho, alpha, ratio):
    """Explicit flux-form step with arithmetic face mobility; ``ratio = dt / dx**2``."""
    mob = rho ** (-alpha)
    rp = np.roll(rho, -1)
    face = 0.5 * (mob + np.roll(mob, -1))
    flux = face * (rp - rho)
    return rho + ratio * (flux - np.roll(flux, 1))
