#!/usr/bin/env python3
"""Benchmark the compiled operator-matrix kernel against the NumPy fallback.

Times the dense assembly (the inversion hot spot) across grid sizes, checks
that both backends agree, and reports an end-to-end recovery timing.

    python benchmarks/bench_backends.py [--sizes 501 1001 2001] [--kappa 0.5]
"""

import argparse
import time

import numpy as np

from tubeflood._kernels import _ref

try:
    from tubeflood._kernels import _fast
except ImportError:
    _fast = None


def time_assembly(impl, grid, kappa, nodes, weights, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        matrix = impl.t_matrix(grid, kappa, nodes, weights)
        best = min(best, time.perf_counter() - start)
    return best, matrix


def time_solve(n_grid):
    from tubeflood.forward import build_curve
    from tubeflood.inverse import RecoveryConfig, _unit_t_matrix, solve_fixed_point
    from tubeflood.measures import Measure

    _unit_t_matrix.cache_clear()
    curve = build_curve(Measure(pieces=((3.0, 9.0, 1.0),)), 0.5, 10.0, 2 * n_grid + 1)
    start = time.perf_counter()
    result = solve_fixed_point(curve, RecoveryConfig(n_grid=n_grid))
    return time.perf_counter() - start, result.iterations


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[251, 501, 1001, 2001])
    parser.add_argument("--kappa", type=float, default=0.5)
    parser.add_argument("--order", type=int, default=4)
    args = parser.parse_args()

    nodes, weights = np.polynomial.legendre.leggauss(args.order)
    print(f"operator matrix assembly, kappa={args.kappa}, order={args.order}")
    print(f"{'n':>6} {'numpy [s]':>12} {'cython [s]':>12} {'speedup':>9} {'max|diff|':>11}")
    for n in args.sizes:
        grid = np.linspace(0.0, 10.0, n)
        t_ref, m_ref = time_assembly(_ref, grid, args.kappa, nodes, weights)
        if _fast is None:
            print(f"{n:>6} {t_ref:>12.4f} {'-':>12} {'-':>9} {'-':>11}")
            continue
        t_fast, m_fast = time_assembly(_fast, grid, args.kappa, nodes, weights)
        diff = float(np.max(np.abs(m_ref - m_fast)))
        print(f"{n:>6} {t_ref:>12.4f} {t_fast:>12.4f} {t_ref / t_fast:>8.1f}x {diff:>11.2e}")

    print()
    elapsed, iterations = time_solve(2001)
    from tubeflood._kernels import BACKEND

    print(
        f"full recovery (n_grid=2001, selected backend '{BACKEND}'): "
        f"{elapsed:.3f}s, {iterations} iterations"
    )


if __name__ == "__main__":
    main()
