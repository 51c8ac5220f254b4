#!/usr/bin/env python3
"""Time the compiled SMO core against the pure-Python fallback.

Generates two-class Gaussian problems of growing size, solves each with
both backends, checks the dual objectives agree, and prints a timing
table with the speedup. Run from the repository root:

    python benchmarks/bench_backends.py [--sizes 50,100,200,400]
"""

import argparse
import time

import numpy as np

from landsvm import KernelSpec, dual_objective
from landsvm.kernels import gram_matrix
from landsvm import _smo_py

try:
    from landsvm import _smo
except ImportError:
    _smo = None


def make_problem(n, seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    half = n // 2
    x = np.vstack(
        [
            rng.standard_normal((half, 4)) + 1.0,
            rng.standard_normal((n - half, 4)) - 1.0,
        ]
    )
    y = np.concatenate([np.ones(half), -np.ones(n - half)])
    return x, y


def run(solver, K, y, repeats):
    best = float("inf")
    alpha = None
    for _ in range(repeats):
        start = time.perf_counter()
        alpha, sweeps, converged = solver(K, y, 1.0, 1e-3, 10, 10_000)
        best = min(best, time.perf_counter() - start)
    return best, alpha


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="50,100,200")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if _smo is None:
        print("compiled core not available; benchmarking python only")
    spec = KernelSpec(kind="rbf", gamma=0.5)
    print(f"{'n':>6} {'python (s)':>12} {'cython (s)':>12} {'speedup':>9}")
    for n in sizes:
        x, y = make_problem(n, seed=n)
        K = gram_matrix(spec, x)
        t_py, a_py = run(_smo_py.smo_solve, K, y, args.repeats)
        if _smo is None:
            print(f"{n:>6} {t_py:>12.4f} {'-':>12} {'-':>9}")
            continue
        t_cy, a_cy = run(_smo.smo_solve, K, y, args.repeats)
        w_py = dual_objective(K, y, a_py)
        w_cy = dual_objective(K, y, a_cy)
        gap = abs(w_py - w_cy) / max(1.0, abs(w_py))
        assert gap < 1e-8, f"backends disagree at n={n}: {w_py} vs {w_cy}"
        print(f"{n:>6} {t_py:>12.4f} {t_cy:>12.4f} {t_py / t_cy:>8.1f}x")


if __name__ == "__main__":
    main()
