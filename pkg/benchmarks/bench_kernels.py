"""Benchmark the compiled kernels against the pure-numpy fallback.

The hot path is the membership bisection (`bisect_alpha`): a height
function evaluation runs tens of containment tests back to back, which
is where the numba-compiled loop pays off.  Run with:

    python3 benchmarks/bench_kernels.py

The script times both implementations in-process (the compiled path is
skipped automatically when ORC_NO_NUMBA=1 or numba is unavailable).
"""

from __future__ import annotations

import time

import numpy as np

from orc import kernels
from orc.bodies import Ball, BoxBody, Simplex


def bench(fn, args_iter, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for args in args_iter:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    cases = []
    for n in (2, 8, 32):
        for spec in (Ball(np.zeros(n), 1.0), BoxBody(np.zeros(n), 1.0),
                     Simplex(n, 1.0)):
            code, M, v, s = spec.kernel_args()
            for _ in range(200):
                d = rng.normal(size=n) * 0.01
                x = rng.normal(size=n)
                x /= np.linalg.norm(x)
                cases.append((code, d, x, M, v, s, 4.0, 40))

    py_time = bench(kernels.bisect_py, cases)
    print(f"pure numpy  bisect (40 iters x {len(cases)} queries): "
          f"{py_time * 1e3:8.1f} ms")

    if kernels.NUMBA_ENABLED:
        kernels.bisect_alpha(*cases[0])  # trigger compilation outside timing
        nb_time = bench(kernels.bisect_alpha, cases)
        print(f"numba njit  bisect (40 iters x {len(cases)} queries): "
              f"{nb_time * 1e3:8.1f} ms")
        print(f"speedup: {py_time / nb_time:0.1f}x")
    else:
        print("numba path disabled (ORC_NO_NUMBA set or numba missing); "
              "only the fallback was timed")


if __name__ == "__main__":
    main()
