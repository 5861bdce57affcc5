"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import time

import numpy as np

from treebound import _pykernels
from treebound.topology import nested_sets_from_depths

try:
    from treebound import _ckernels
except ImportError:
    _ckernels = None


def _bound_sweep(k):
    for T in range(2, 11):
        for i in range(1, 20):
            for j in range(0, 20 - i):
                a, b = i / 20, j / 20
                k.bisect_root(T, a, b, max(1 - a, b), 1.0, 1e-12, 200)


def _power(k):
    a, b, T = 0.3, 0.2, 10
    Z = b * np.eye(T)
    Z[np.arange(1, T), np.arange(T - 1)] = a
    Z[:, -1] += 1 - (a + b)
    for _ in range(20):
        k.power_iteration(Z, 1e-10, 100_000)


def _simulate(k):
    rng = np.random.default_rng(0)
    levels = [0] + list(range(1, 7)) + list(rng.integers(1, 7, size=23))
    depth, order, starts = nested_sets_from_depths(levels).index_arrays()
    x0 = np.linspace(0, 1, len(levels))
    for seed in range(10):
        k.simulate(depth, order, starts, 0.4, 0.2, 0.5, seed % 2 == 1, seed, x0, 300)


CASES = {"bisection sweep": _bound_sweep, "power iteration": _power,
         "simulate n=30 x10": _simulate}


def best_of(fn, k, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(k)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'case':<20}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in CASES.items():
        tp = best_of(fn, _pykernels, args.repeat)
        if _ckernels is None:
            print(f"{name:<20}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc = best_of(fn, _ckernels, args.repeat)
        print(f"{name:<20}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
