"""Grids, quadrature, the discrete Maxwellian and weighted L2 norms.

Fields are plain numpy arrays:

* scalar fields on the torus have shape ``(n,)``,
* velocity profiles have shape ``(nv,)``,
* phase fields have shape ``(n, nv)`` with ``f[i, j] = f(x_i, v_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid on the unit torus with nodes ``x_i = i / n``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"torus grid needs an integer n >= 2, got {self.n!r}")

    @property
    def dx(self) -> float:
        return 1.0 / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx


@dataclass(frozen=True)
class VelocityGrid:
    """Midpoint grid on ``[-vmax, vmax]``; nodes come in symmetric pairs."""

    nv: int = 128
    vmax: float = 8.0

    def __post_init__(self):
        if int(self.nv) != self.nv or self.nv < 2 or self.nv % 2:
            raise ValueError(f"velocity grid needs a positive even nv, got {self.nv!r}")
        if self.vmax < 6.0:
            raise ValueError(f"vmax must be >= 6 to resolve the Gaussian tail, got {self.vmax}")

    @property
    def dv(self) -> float:
        return 2.0 * self.vmax / self.nv

    @cached_property
    def v(self) -> np.ndarray:
        j = np.arange(self.nv)
        v = -self.vmax + (j + 0.5) * self.dv
        # enforce exact antisymmetry so odd moments cancel identically
        half = self.nv // 2
        v[:half] = -v[::-1][:half]
        return v


def discrete_maxwellian(vgrid: VelocityGrid) -> np.ndarray:
    """Unit Gaussian on the velocity nodes, rescaled to unit discrete mass."""
    v = vgrid.v
    m = np.exp(-0.5 * v * v) / np.sqrt(2.0 * np.pi)
    return m / (m.sum() * vgrid.dv)


def maxwellian_renormalization(vgrid: VelocityGrid) -> float:
    """The factor ``c`` applied to the sampled Gaussian by :func:`discrete_maxwellian`."""
    v = vgrid.v
    raw = np.exp(-0.5 * v * v) / np.sqrt(2.0 * np.pi)
    return 1.0 / (raw.sum() * vgrid.dv)


def quad_v(values: np.ndarray, vgrid: VelocityGrid) -> np.ndarray | float:
    """Midpoint rule in v over the last axis."""
    values = np.asarray(values)
    if values.shape[-1] != vgrid.nv:
        raise ValueError(f"last axis has length {values.shape[-1]}, expected nv={vgrid.nv}")
    return values.sum(axis=-1) * vgrid.dv


def quad_x(values: np.ndarray, grid: TorusGrid) -> float:
    values = np.asarray(values)
    if values.shape[0] != grid.n:
        raise ValueError(f"first axis has length {values.shape[0]}, expected n={grid.n}")
    return float(values.sum(axis=0) * grid.dx)


def norm_l2_minv(f, grid: TorusGrid, vgrid: VelocityGrid, ref=None, maxw=None) -> float:
    """``||f - ref||`` in L2(dx dv / M).

    ``ref`` defaults to the Maxwellian; it may be a velocity profile of shape
    ``(nv,)`` or a full phase array.
    """
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n, vgrid.nv):
        raise ValueError(f"phase field has shape {f.shape}, expected {(grid.n, vgrid.nv)}")
    ref = maxw if ref is None else np.asarray(ref, dtype=float)
    if ref.shape not in (f.shape, (vgrid.nv,)):
        raise ValueError(f"shape mismatch: field {f.shape} vs reference {ref.shape}")
    d = f - ref
    return float(np.sqrt(np.sum(d * d / maxw) * grid.dx * vgrid.dv))


def norm_l2_m(h, grid: TorusGrid, vgrid: VelocityGrid, ref=0.0, maxw=None) -> float:
    """``||h - ref||`` in L2(M dx dv).

    ``ref`` may be a scalar, a scalar field of shape ``(n,)`` (broadcast over v)
    or a full phase array.
    """
    if maxw is None:
        maxw = discrete_maxwellian(vgrid)
    h = np.asarray(h, dtype=float)
    if h.shape != (grid.n, vgrid.nv):
        raise ValueError(f"phase field has shape {h.shape}, expected {(grid.n, vgrid.nv)}")
    ref = np.asarray(ref, dtype=float)
    if ref.ndim == 1:
        if ref.shape[0] != grid.n:
            raise ValueError(f"reference has shape {ref.shape}, expected ({grid.n},)")
        ref = ref[:, None]
    elif ref.ndim == 2 and ref.shape != h.shape:
        raise ValueError(f"shape mismatch: field {h.shape} vs reference {ref.shape}")
    d = h - ref
    return float(np.sqrt(np.sum(d * d * maxw[None, :]) * grid.dx * vgrid.dv))


@dataclass(frozen=True)
class Tolerances:
    sandwich_slack: float = 1e-10
    mass_rel: float = 1e-11
    functional_rel: float = 1e-8


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical parameters of a kinetic run.

    ``dt_cap`` of ``None`` means half a cell width.
    """

    alpha: float = 0.0
    bigA: float = 2.0
    eps: float = 0.1
    grid: TorusGrid = field(default_factory=lambda: TorusGrid(128))
    vgrid: VelocityGrid = field(default_factory=VelocityGrid)
    beta_rel: float = 0.5
    dt_cap: float | None = None
    t_end: float = 1.0
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if not self.bigA > 1.0:
            raise ValueError(f"A must exceed 1, got {self.bigA}")
        if not self.eps > 0.0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        if not self.t_end > 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if not self.beta_rel > 0.0:
            raise ValueError(f"beta_rel must be positive, got {self.beta_rel}")
        if self.dt_cap is not None and not self.dt_cap > 0.0:
            raise ValueError(f"dt_cap must be positive, got {self.dt_cap}")

    @property
    def dt(self) -> float:
        cap = 0.5 * self.grid.dx if self.dt_cap is None else self.dt_cap
        return min(self.beta_rel * self.eps ** 2, cap)

    @property
    def eps0(self) -> float:
        return eps0(self.alpha, self.bigA)

    @property
    def claims_hypocoercivity(self) -> bool:
        return self.eps <= self.eps0


def eps0(alpha: float, bigA: float) -> float:
    """Largest eps for which the perturbed-functional argument is run."""
    return min(1.0, bigA ** alpha * (2.0 + bigA ** (2 * alpha)) / 2.0)


def cosine_density(grid: TorusGrid, amplitude: float, mode: int = 1) -> np.ndarray:
    return 1.0 + amplitude * np.cos(2.0 * np.pi * mode * grid.x)
