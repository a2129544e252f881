"""Compare the numba and numpy kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Prints best-of-N wall time per kernel and size, the speed ratio, and the
largest absolute difference between the two results.
"""
import argparse
import time

import numpy as np

from fdclutter import _kernels


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def pair_cases(rng):
    for n in (256, 1024, 2048):
        k = rng.normal(scale=50.0, size=n)
        yield f"pair_integral n={n}", (k, -0.4, 0.7)


def grid_cases(rng):
    for n, m in ((512, 4096), (2048, 4096), (4096, 8192)):
        args = (10e9 + 10e6 * rng.integers(0, 16, n), rng.uniform(0, 3e-3, n),
                rng.uniform(0, 4.0, n), np.ones(n), rng.uniform(0, 15, m),
                rng.uniform(-75, 75, m), rng.uniform(-1, 1, m))
        yield f"steering_grid {n}x{m}", args


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':30s} {'numpy [s]':>10s} {'numba [s]':>10s} {'speed-up':>9s} {'max |diff|':>11s}")
    pairs = [(_kernels.pair_integral_numpy, _kernels.pair_integral_numba, pair_cases(rng)),
             (_kernels.steering_grid_numpy, _kernels.steering_grid_numba, grid_cases(rng))]
    for f_np, f_nb, cases in pairs:
        for name, a in cases:
            t_np = best_of(lambda: f_np(*a), args.repeat)
            t_nb = best_of(lambda: f_nb(*a), args.repeat)
            diff = np.abs(f_np(*a) - f_nb(*a)).max()
            print(f"{name:30s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:9.2f} {diff:11.2e}")


if __name__ == "__main__":
    main()
