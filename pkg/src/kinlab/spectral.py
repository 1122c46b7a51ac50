"""Fourier analysis on the unit torus grid.

Coefficients follow ``u_hat(k) = int u(x) exp(-2 pi i k x) dx``, realized as the
discrete transform scaled by ``dx``, so ``u_hat(0)`` is the spatial mean.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POINCARE_CONSTANT = 4.0 * np.pi ** 2 / (1.0 + 4.0 * np.pi ** 2)


def wavenumbers(n: int) -> np.ndarray:
    """Integer modes ``0, 1, ..., n/2`` matching ``numpy.fft.rfft`` output."""
    return np.arange(n // 2 + 1, dtype=float)


def transform(u: np.ndarray) -> np.ndarray:
    """Full complex spectrum for modes in ``fftfreq`` order."""
    u = np.asarray(u, dtype=float)
    return np.fft.fft(u) / u.shape[0]


def inverse_transform(uhat: np.ndarray) -> np.ndarray:
    return np.fft.ifft(uhat * uhat.shape[0]).real


def _apply(u, multiplier):
    u = np.asarray(u, dtype=float)
    n = u.shape[0]
    return np.fft.irfft(np.fft.rfft(u) * multiplier(wavenumbers(n), n), n)


def inv_helmholtz(u: np.ndarray) -> np.ndarray:
    """``(I - Laplacian)^{-1} u``."""
    return _apply(u, lambda k, n: 1.0 / (1.0 + 4.0 * np.pi ** 2 * k * k))


def inv_helmholtz_sqrt(u: np.ndarray) -> np.ndarray:
    """``(I - Laplacian)^{-1/2} u``."""
    return _apply(u, lambda k, n: 1.0 / np.sqrt(1.0 + 4.0 * np.pi ** 2 * k * k))


def _ik(k, n):
    m = 2j * np.pi * k
    if n % 2 == 0:
        # the Nyquist mode has no real-valued derivative
        m[-1] = 0.0
    return m


def grad(u: np.ndarray) -> np.ndarray:
    """Spectral derivative; in one dimension this is also the divergence."""
    return _apply(u, _ik)


div = grad


def second_derivative(u: np.ndarray) -> np.ndarray:
    return _apply(u, lambda k, n: -4.0 * np.pi ** 2 * k * k)


def l2_sq(u: np.ndarray) -> float:
    u = np.asarray(u)
    return float(np.sum(u * u) / u.shape[0])


def inner(u: np.ndarray, w: np.ndarray) -> float:
    return float(np.dot(u, w) / np.asarray(u).shape[0])


@dataclass(frozen=True)
class FourierReport:
    """Both sides of the three Fourier estimates for a single field.

    Margins are ``rhs - lhs`` for the two upper bounds and ``lhs - rhs`` for
    the coercivity bound; all are normalized by ``||u||^2`` (or 1 if zero).
    """

    hess_lhs: float
    hess_rhs: float
    grad_lhs: float
    grad_rhs: float
    coerc_lhs: float
    coerc_rhs: float
    scale: float

    @property
    def margins(self) -> tuple[float, float, float]:
        s = self.scale
        return (
            (self.hess_rhs - self.hess_lhs) / s,
            (self.grad_rhs - self.grad_lhs) / s,
            (self.coerc_lhs - self.coerc_rhs) / s,
        )

    def holds(self, tol: float = 1e-12) -> bool:
        return min(self.margins) >= -tol


def lemma22_check(u: np.ndarray) -> FourierReport:
    u = np.asarray(u, dtype=float)
    centered = u - u.mean()
    du = grad(u)
    norm_u = l2_sq(u)
    return FourierReport(
        hess_lhs=l2_sq(inv_helmholtz(second_derivative(u))),
        hess_rhs=norm_u,
        grad_lhs=l2_sq(inv_helmholtz(du)),
        grad_rhs=l2_sq(centered),
        coerc_lhs=l2_sq(inv_helmholtz_sqrt(du)),
        coerc_rhs=POINCARE_CONSTANT * l2_sq(centered),
        scale=norm_u if norm_u > 0.0 else 1.0,
    )


def random_trig_polynomial(n: int, degree: int, rng: np.random.Generator) -> np.ndarray:
    """Real trigonometric polynomial of the given degree with normal coefficients."""
    x = np.arange(n) / n
    k = np.arange(1, degree + 1)
    a, b = rng.standard_normal((2, degree))
    u = rng.standard_normal() + (a[:, None] * np.cos(2 * np.pi * k[:, None] * x)).sum(0)
    return u + (b[:, None] * np.sin(2 * np.pi * k[:, None] * x)).sum(0)
