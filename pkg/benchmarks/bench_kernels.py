#!/usr/bin/env python3
"""Benchmark the hot sampling kernels: numba-jitted loops versus the
vectorized numpy fallback.

Both paths consume the identical counter-based stream, so outputs match
bit-for-bit; this script measures the speed difference and verifies the
equality on a prefix.

Usage:
    python benchmarks/bench_kernels.py [--samples 500000] [--repeat 3]
"""

import argparse
import sys
import time

import numpy as np


def run_case(label, fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<28s} {best * 1e3:10.1f} ms")
    return result, best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=float, default=5e5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    n = int(args.samples)

    from critshuffle._backend import HAS_NUMBA
    from critshuffle import _kernels
    from critshuffle.distcore import make_poisson

    if not HAS_NUMBA:
        print("numba not importable; only the numpy path can run", file=sys.stderr)

    cdf_small = np.cumsum(make_poisson(0.02, 1e-15).mass)
    cdf_base = np.cumsum(make_poisson(1.0, 1e-15).mass)
    cdf_extra = np.cumsum(make_poisson(0.5, 1e-15).mass)
    cond_cdf = np.cumsum(np.array([0.5, 0.5]))

    cases = [
        ("binomial/Poisson coupler (m=50)",
         lambda: _kernels._binom_poisson_numpy(7, n, 50, cdf_small, 0.01),
         (lambda: _kernels._binom_poisson_nb(np.uint64(7), n, 50, cdf_small, 0.01))
         if HAS_NUMBA else None),
        ("Poisson perturbation coupler",
         lambda: _kernels._poisson_poisson_numpy(7, n, cdf_base, cdf_extra),
         (lambda: _kernels._poisson_poisson_nb(np.uint64(7), n, cdf_base, cdf_extra))
         if HAS_NUMBA else None),
        ("multinomial coupler (m=100)",
         lambda: _kernels._multinomial_poisson_numpy(7, n, 100, cdf_small, 0.01,
                                                     cond_cdf, 2),
         (lambda: _kernels._multinomial_poisson_nb(np.uint64(7), n, 100, cdf_small,
                                                   0.01, cond_cdf, 2))
         if HAS_NUMBA else None),
    ]

    print(f"samples per case: {n}")
    for label, numpy_fn, numba_fn in cases:
        print(label)
        res_np, t_np = run_case("numpy fallback", numpy_fn, args.repeat)
        if numba_fn is not None:
            numba_fn()  # compile outside the timed region
            res_nb, t_nb = run_case("numba kernel", numba_fn, args.repeat)
            same = all(np.array_equal(a, b) for a, b in zip(res_np, res_nb))
            print(f"  outputs identical: {same}   speedup x{t_np / t_nb:.1f}")
            if not same:
                sys.exit(1)


if __name__ == "__main__":
    main()
