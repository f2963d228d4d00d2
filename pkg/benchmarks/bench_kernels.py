#!/usr/bin/env python3
"""Benchmark the compiled stepping kernel against the NumPy fallback.

Advances the reference bump scenario over a fixed window with both backends
and reports steps/second and the speedup. Run from the repo root:

    python3 benchmarks/bench_kernels.py [--n 512] [--window 0.2]
"""

import argparse
import time

import numpy as np

from pmelab import _kernels_py
from pmelab.mesh import Potential, build_mesh

try:
    from pmelab import _kernels
except ImportError:
    _kernels = None


def setup(n):
    mesh = build_mesh(Potential("gaussian"), 8.0, n)
    x = mesh.centers
    shape = np.exp(-0.5 * ((x - 1.0) / 0.25) ** 2)
    mu = shape / mesh.integrate(shape)
    return mesh, mu


def bench(impl, mesh, mu, window, repeats=3):
    best = np.inf
    steps = 0
    for _ in range(repeats):
        t0 = time.perf_counter()
        out, steps, status, _, _ = impl.explicit_advance(
            mu, mesh.cell_weights, mesh.face_weights, mesh.h,
            1.0, 0.5, 0.2, 1e-2, mesh.cfl_weight_max,
            0.0, window, 0, 0.0, 10**9)
        elapsed = time.perf_counter() - t0
        assert status == impl.STATUS_OK
        best = min(best, elapsed)
    return out, steps, best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=512)
    ap.add_argument("--window", type=float, default=0.2)
    args = ap.parse_args()

    mesh, mu = setup(args.n)
    print(f"n = {args.n}, window = {args.window}, beta = 1, c_eq = 1/2")

    out_py, steps, t_py = bench(_kernels_py, mesh, mu, args.window)
    print(f"python   : {steps:>8d} steps in {t_py:.3f} s "
          f"({steps / t_py:,.0f} steps/s)")

    if _kernels is None:
        print("compiled : not built (pip install -e . --no-build-isolation)")
        return

    out_c, steps_c, t_c = bench(_kernels, mesh, mu, args.window)
    print(f"compiled : {steps_c:>8d} steps in {t_c:.3f} s "
          f"({steps_c / t_c:,.0f} steps/s)")
    assert steps == steps_c
    drift = float(np.max(np.abs(out_py - out_c)))
    print(f"speedup  : {t_py / t_c:.1f}x   (max state deviation {drift:.2e})")


if __name__ == "__main__":
    main()
