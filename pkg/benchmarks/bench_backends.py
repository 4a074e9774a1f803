"""Benchmark: compiled kernel core vs numpy fallback.

Times the three pairwise operations that dominate a simulation step at a
few realistic sizes and prints a speedup table.

Run:  python benchmarks/bench_backends.py
"""

import time

import numpy as np

from morphoflow._kernels import _ext, numpy_backend


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    rng = np.random.default_rng(0)
    sigma = 0.2
    print(f"{'operation':<14}{'size':<18}{'ext [ms]':>10}{'numpy [ms]':>12}"
          f"{'speedup':>9}")
    for n, m in ((300, 900), (700, 4000), (1300, 7800)):
        points = rng.uniform(-1, 1, size=(n, 2))
        momenta = rng.standard_normal((n, 2))
        queries = rng.uniform(-1, 1, size=(m, 2))

        cases = {
            f"gram": (
                f"n={n}",
                lambda: _ext.gram(points, sigma),
                lambda: numpy_backend.gram(points, sigma),
            ),
            f"eval_field": (
                f"n={n} m={m}",
                lambda: _ext.eval_field(points, momenta, queries, sigma),
                lambda: numpy_backend.eval_field(points, momenta, queries, sigma),
            ),
            f"grad_tensor": (
                f"n={n} m={m}",
                lambda: _ext.grad_tensor(points, queries, sigma),
                lambda: numpy_backend.grad_tensor(points, queries, sigma),
            ),
        }
        for name, (size, fast, slow) in cases.items():
            t_ext = best_of(fast)
            t_np = best_of(slow)
            print(f"{name:<14}{size:<18}{t_ext * 1e3:>10.2f}{t_np * 1e3:>12.2f}"
                  f"{t_np / t_ext:>9.2f}x")


if __name__ == "__main__":
    main()
