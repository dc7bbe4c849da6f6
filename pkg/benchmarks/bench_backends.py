#!/usr/bin/env python3
"""Benchmark the compiled kernel extension against the pure-numpy fallback.

Times the hot paths on realistic sizes: the GPD profile-likelihood fit
(small tail samples and large synthetic ones), the break-even threshold
scan over one 100-day window, and the conditional-variance recursions.

Usage: python benchmarks/bench_backends.py [--repeat N]
"""

import argparse
import math
import time

import numpy as np

from dynevt._kernels import get_backend


def gpd_draws(rng, xi, sigma, n):
    u = rng.random(n)
    if abs(xi) < 1e-9:
        return -sigma * np.log1p(-u)
    return sigma / xi * ((1.0 - u) ** -xi - 1.0)


def timeit(fn, repeat, min_time=0.2):
    # warm up, then run enough iterations for a stable estimate
    fn()
    n, elapsed = 0, 0.0
    while elapsed < min_time or n < repeat:
        t0 = time.perf_counter()
        fn()
        elapsed += time.perf_counter() - t0
        n += 1
    return elapsed / n


def build_cases(rng):
    y_small = gpd_draws(rng, 0.3, 1.0, 50)
    y_big = gpd_draws(rng, 0.3, 1.0, 10000)
    w = rng.standard_t(5, 100) * 0.01
    losses = -w
    cand = np.unique(-w[w < 0.0])
    x5k = rng.standard_normal(5000) * 0.01
    alpha = np.array([0.07])
    beta = np.array([0.9])
    betag = np.array([1.0])
    ez = math.sqrt(2.0 / math.pi)

    def cases(k):
        return {
            "fit_gpd (n=50)": lambda: k.fit_gpd(y_small),
            "fit_gpd (n=10000)": lambda: k.fit_gpd(y_big),
            "brt_scan (100-day window)": lambda: k.brt_scan(
                losses, cand, 100, 0.025, 0.95, 10),
            "garch_filter (n=5000)": lambda: k.garch_filter(
                x5k, 1e-6, alpha, beta, 1e-4),
            "egarch_filter (n=5000)": lambda: k.egarch_filter(
                x5k, -0.5, betag, np.array([0.94]), -0.08, 0.15,
                math.log(1e-4), ez),
            "caviar_filter (n=5000)": lambda: k.caviar_filter(
                x5k, -0.001, 0.9, 0.05, -0.3, -0.015),
        }

    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5,
                        help="minimum timed iterations per case")
    args = parser.parse_args()

    pure = get_backend("pure")
    try:
        core = get_backend("compiled")
    except ImportError:
        print("compiled backend not built; run `pip install -e .` with a "
              "C toolchain to compare. Timing the pure backend only.")
        core = None

    rng = np.random.default_rng(0)
    cases = build_cases(rng)
    pure_cases = cases(pure)
    core_cases = cases(core) if core else {}

    width = max(len(name) for name in pure_cases)
    if core:
        print(f"{'case':<{width}}  {'compiled':>12}  {'pure':>12}  {'speedup':>8}")
        for name in pure_cases:
            tc = timeit(core_cases[name], args.repeat)
            tp = timeit(pure_cases[name], args.repeat)
            print(f"{name:<{width}}  {tc * 1e3:>10.3f}ms  {tp * 1e3:>10.3f}ms"
                  f"  {tp / tc:>7.1f}x")
    else:
        print(f"{'case':<{width}}  {'pure':>12}")
        for name, fn in pure_cases.items():
            print(f"{name:<{width}}  {timeit(fn, args.repeat) * 1e3:>10.3f}ms")


if __name__ == "__main__":
    main()
