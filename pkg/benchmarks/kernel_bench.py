#!/usr/bin/env python3
"""Benchmark the compiled stencil kernels against the pure-numpy fallback.

Runs every kernel on rectangle and polar grids at a few sizes and prints a
table of timings plus the worst relative deviation between backends.

    python benchmarks/kernel_bench.py [--sizes 64 128 256] [--reps 20]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nematic_walls import stencils  # noqa: E402


def timeit(fn, args, reps):
    fn(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        fn(*args)
    return (time.perf_counter() - t0) / reps


def rel_dev(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(1.0, float(np.max(np.abs(a))))
    return float(np.max(np.abs(a - b))) / scale


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--reps", type=int, default=20)
    args = ap.parse_args()

    py = stencils.python_impl
    cy = stencils.compiled_impl
    if cy is None:
        print("compiled kernels unavailable; showing the fallback only")
    rng = np.random.default_rng(0)

    header = f"{'kernel':<18} {'grid':>10} {'python':>10} {'compiled':>10} {'speedup':>8} {'rel dev':>9}"
    print(header)
    print("-" * len(header))
    for n in args.sizes:
        u = rng.normal(size=(n + 1, 2 * n, 2))
        hx, hy = 1.0 / n, 1.0 / n
        rs = np.linspace(1e-3, 0.6, n + 1)
        ts = np.linspace(0.0, 2 * np.pi, 2 * n, endpoint=False)
        dr, dt = rs[1] - rs[0], ts[1] - ts[0]
        cases = [
            ("rect_grad_form", (u, hx, hy, True)),
            ("rect_grad_op", (u, hx, hy, True)),
            ("rect_div_form", (u, hx, hy, True)),
            ("rect_div_op", (u, hx, hy, True)),
            ("polar_grad_form", (u, rs, dr, dt)),
            ("polar_grad_op", (u, rs, dr, dt)),
            ("polar_div_form", (u, rs, ts, dr, dt)),
            ("polar_div_op", (u, rs, ts, dr, dt)),
        ]
        for name, a in cases:
            t_py = timeit(getattr(py, name), a, args.reps)
            if cy is None:
                print(f"{name:<18} {n}x{2*n:>6} {t_py*1e3:>9.2f}ms {'-':>10} {'-':>8} {'-':>9}")
                continue
            t_cy = timeit(getattr(cy, name), a, args.reps)
            dev = rel_dev(getattr(py, name)(*a), getattr(cy, name)(*a))
            print(f"{name:<18} {n}x{2*n:>6} {t_py*1e3:>9.2f}ms {t_cy*1e3:>8.2f}ms "
                  f"{t_py/t_cy:>7.1f}x {dev:>9.1e}")


if __name__ == "__main__":
    main()
