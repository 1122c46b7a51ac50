# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_kernels_py`` (same signatures)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, floor, pow

cnp.import_array()


cdef void _plan(double[::1] shift, Py_ssize_t n, Py_ssize_t[::1] m0, double[::1] theta) noexcept nogil:
    cdef Py_ssize_t j, m
    cdef double fl
    for j in range(shift.shape[0]):
        fl = floor(shift[j])
        theta[j] = shift[j] - fl
        m = <Py_ssize_t>fl % n
        if m < 0:
            m += n
        m0[j] = m


cdef void _transport(double[:, ::1] f, double[:, ::1] out, Py_ssize_t[::1] m0,
                     double[::1] theta) noexcept nogil:
    cdef Py_ssize_t n = f.shape[0], nv = f.shape[1]
    cdef Py_ssize_t i, j, a, b
    cdef double th
    for i in range(n):
        for j in range(nv):
            a = i - m0[j]
            if a < 0:
                a += n
            b = a - 1
            if b < 0:
                b += n
            th = theta[j]
            out[i, j] = (1.0 - th) * f[a, j] + th * f[b, j]


def transport_rows(f, shift_cells):
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(shift_cells, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0], nv = fv.shape[1]
    if s.shape[0] != nv:
        raise ValueError("shift_cells must have one entry per velocity")
    out = np.empty((n, nv))
    m0 = np.empty(nv, dtype=np.intp)
    theta = np.empty(nv)
    _plan(s, n, m0, theta)
    _transport(fv, out, m0, theta)
    return out


def relax_toward(f, maxw, rho, decay):
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(maxw, dtype=np.float64)
    cdef double[::1] rv = np.ascontiguousarray(rho, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(decay, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0], nv = fv.shape[1], i, j
    out = np.empty((n, nv))
    cdef double[:, ::1] ov = out
    cdef double eq
    with nogil:
        for i in range(n):
            for j in range(nv):
                eq = rv[i] * mv[j]
                ov[i, j] = eq + (fv[i, j] - eq) * dv[i]
    return out


cdef void _density(double[:, ::1] f, double dv, double[::1] rho) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(f.shape[0]):
        acc = 0.0
        for j in range(f.shape[1]):
            acc += f[i, j]
        rho[i] = acc * dv


def density(f, double dv):
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    rho = np.empty(fv.shape[0])
    _density(fv, dv, rho)
    return rho


def strang_step(f, maxw, double dv, half_shift_cells, double alpha, double rate_dt):
    """Fused transport/relax/transport; returns ``(state, relaxation density)``."""
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(maxw, dtype=np.float64)
    cdef double[::1] s = np.ascontiguousarray(half_shift_cells, dtype=np.float64)
    cdef Py_ssize_t n = fv.shape[0], nv = fv.shape[1], i, j
    g = np.empty((n, nv))
    out = np.empty((n, nv))
    rho = np.empty(n)
    cdef Py_ssize_t[::1] m0 = np.empty(nv, dtype=np.intp)
    cdef double[::1] theta = np.empty(nv)
    cdef double[:, ::1] gv = g, ov = out
    cdef double[::1] rv = rho
    cdef double eq, d
    cdef bint positive = True
    with nogil:
        _plan(s, n, m0, theta)
        _transport(fv, gv, m0, theta)
        _density(gv, dv, rv)
        for i in range(n):
            if not rv[i] > 0.0:
                positive = False
                break
        if positive:
            for i in range(n):
                d = exp(-pow(rv[i], alpha) * rate_dt)
                for j in range(nv):
                    eq = rv[i] * mv[j]
                    gv[i, j] = eq + (gv[i, j] - eq) * d
    if not positive:
        return g, rho
    with nogil:
        _transport(gv, ov, m0, theta)
    return out, rho


def diffusion_step(rho, double alpha, double ratio):
    cdef double[::1] r = np.ascontiguousarray(rho, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0], i, ip
    out = np.empty(n)
    mob = np.empty(n)
    flux = np.empty(n)
    cdef double[::1] ov = out, mb = mob, fl = flux
    with nogil:
        for i in range(n):
            mb[i] = pow(r[i], -alpha)
        for i in range(n):
            ip = i + 1 if i + 1 < n else 0
            fl[i] = 0.5 * (mb[i] + mb[ip]) * (r[ip] - r[i])
        for i in range(n):
            ov[i] = r[i] + ratio * (fl[i] - fl[i - 1 if i > 0 else n - 1])
    return out
