"""Compare the compiled and pure-Python kernels on the two hot loops.

Run with ``python3 benchmarks/bench_kernels.py``. Each row reports the best of
several repeats and checks that both backends agree.
"""

import argparse
import random
import time

import numpy as np

from k3kit import kernels


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_convolve(n, bits, repeats):
    rng = random.Random(n * bits)
    a = [rng.randrange(-(1 << bits), 1 << bits) for _ in range(n)]
    b = [rng.randrange(-(1 << bits), 1 << bits) for _ in range(n)]
    tc, rc = best_of(lambda: kernels.convolve(a, b, n, backend="cython"), repeats)
    tp, rp = best_of(lambda: kernels.convolve(a, b, n, backend="python"), repeats)
    return f"convolve n={n:5d} bits={bits:4d}", tc, tp, rc == rp


def bench_theta(g, radius, repeats):
    rng = np.random.default_rng(g)
    y = rng.normal(size=(g, g))
    y = y @ y.T / g + np.eye(g)
    x = rng.uniform(-0.5, 0.5, size=(g, g))
    x = (x + x.T) / 2
    a = np.full(g, 0.5)
    b = np.zeros(g)
    lo, hi = np.full(g, -radius), np.full(g, radius)
    cutoff = float(radius**2)
    tc, rc = best_of(lambda: kernels.theta_box(x, y, a, b, lo, hi, cutoff, backend="cython"), repeats)
    tp, rp = best_of(lambda: kernels.theta_box(x, y, a, b, lo, hi, cutoff, backend="python"), repeats)
    same = rc[2] == rp[2] and abs(complex(rc[0], rc[1]) - complex(rp[0], rp[1])) < 1e-10
    return f"theta_box g={g} radius={radius:2d}", tc, tp, same


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels unavailable; build with pip install -e . --no-build-isolation")
    rows = [
        bench_convolve(200, 20, args.repeats),
        bench_convolve(1000, 20, args.repeats),
        bench_convolve(1000, 200, args.repeats),
        bench_convolve(3000, 30, args.repeats),
        bench_theta(2, 12, args.repeats),
        bench_theta(3, 8, args.repeats),
        bench_theta(4, 5, args.repeats),
    ]
    print(f"{'case':34s} {'cython s':>10s} {'python s':>10s} {'speedup':>8s} agree")
    for name, tc, tp, same in rows:
        print(f"{name:34s} {tc:10.5f} {tp:10.5f} {tp / tc:8.1f} {same}")


if __name__ == "__main__":
    main()
