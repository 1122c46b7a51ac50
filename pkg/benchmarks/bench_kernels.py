"""Compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Times one Strang step and one diffusion step on the default grids, then a
full kinetic run, for each backend available.
"""
import argparse
import time

import numpy as np

from kinlab import _backend
from kinlab.core import SimParams, TorusGrid, VelocityGrid, cosine_density, discrete_maxwellian


def best_of(fn, repeat, number):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def run_full(kern, params, f0, maxw):
    half = params.vgrid.v * (0.5 * params.dt / (params.eps * params.grid.dx))
    f = f0
    for _ in range(int(round(params.t_end / params.dt))):
        f, _ = kern.strang_step(f, maxw, params.vgrid.dv, half, float(params.alpha), params.dt / params.eps ** 2)
    return f


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--nv", type=int, default=128)
    args = ap.parse_args()

    params = SimParams(alpha=1.0, eps=0.1, grid=TorusGrid(args.n), vgrid=VelocityGrid(args.nv), t_end=0.5)
    maxw = discrete_maxwellian(params.vgrid)
    f0 = cosine_density(params.grid, 0.5)[:, None] * maxw[None, :]
    half = params.vgrid.v * (0.5 * params.dt / (params.eps * params.grid.dx))
    rho = cosine_density(params.grid, 0.5)

    backends = {"python": _backend.python_kernels}
    if _backend.compiled_kernels is not None:
        backends["cython"] = _backend.compiled_kernels
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    ref = run_full(backends["python"], params, f0, maxw)
    rows = []
    for name, kern in backends.items():
        strang = best_of(lambda: kern.strang_step(f0, maxw, params.vgrid.dv, half, 1.0, 0.5), args.repeat, 50)
        diff = best_of(lambda: kern.diffusion_step(rho, 1.0, 0.4), args.repeat, 2000)
        t0 = time.perf_counter()
        out = run_full(kern, params, f0, maxw)
        full = time.perf_counter() - t0
        rows.append((name, strang, diff, full, float(np.max(np.abs(out - ref)))))

    print(f"grid n={args.n} nv={args.nv}, full run = {int(round(params.t_end / params.dt))} Strang steps")
    print(f"{'backend':<8} {'strang step':>12} {'diffusion step':>15} {'full run':>10} {'max |diff|':>11}")
    base = rows[0]
    for name, s, d, f, err in rows:
        print(f"{name:<8} {s * 1e3:>9.3f} ms {d * 1e6:>12.2f} us {f:>8.3f} s {err:>11.2e}"
              + ("" if name == base[0] else f"   ({base[1] / s:.1f}x / {base[2] / d:.1f}x / {base[3] / f:.1f}x)"))


if __name__ == "__main__":
    main()
