"""Compare the compiled and numpy kernel backends on the sequential hot loops.

    python benchmarks/bench_kernels.py --steps 200 --repeat 5
"""

import argparse
import math
import timeit

import numpy as np

from becphase import kernels


def exact_case(steps: int, n: float):
    rng = np.random.default_rng(0)
    ua = np.ones(steps, dtype=complex)
    vb = np.ones(steps, dtype=complex)
    phi = rng.uniform(0, 2 * math.pi, steps)
    return (np.ones(1, dtype=complex), 0, n, n, ua, vb, phi, rng.random(steps),
            np.zeros(steps, dtype=np.int64))


def lambda_case(steps: int, K: int):
    rng = np.random.default_rng(1)
    grid = 2 * math.pi * np.arange(K) / K
    return (np.full(K, 1.0 / K), np.cos(grid), np.sin(grid), np.full(steps, 1.0),
            rng.uniform(0, 2 * math.pi, steps), rng.random(steps), np.zeros(steps, dtype=np.int64))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=200, help="detections per chain")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--n", type=float, default=1e5, help="particles per condensate")
    args = parser.parse_args(argv)

    K = max(4 * (args.steps + 1), 256)
    cases = {
        "exact_sequence": ("exact_sequence", exact_case(args.steps, args.n)),
        f"lambda_sequence (K={K})": ("lambda_sequence", lambda_case(args.steps, K)),
    }
    print(f"steps={args.steps} repeat={args.repeat} default backend={kernels.BACKEND}")
    print(f"{'kernel':<28}{'backend':<10}{'best [ms]':>12}{'speedup':>10}")
    for label, (fn, case) in cases.items():
        timings = {}
        for name, mod in kernels.BACKENDS.items():
            func = getattr(mod, fn)
            number = 3
            best = min(timeit.repeat(lambda: func(*case), number=number, repeat=args.repeat)) / number
            timings[name] = best
        base = timings["python"]
        for name, t in timings.items():
            print(f"{label:<28}{name:<10}{1e3 * t:>12.3f}{base / t:>9.1f}x")


if __name__ == "__main__":
    main()
