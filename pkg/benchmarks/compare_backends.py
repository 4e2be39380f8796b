#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Runs the full pipeline at several sizes with both backends, verifies the
outputs are bitwise identical, and prints a timing table.

Usage: python benchmarks/compare_backends.py [--sizes 200x150,400x300]
"""

import argparse
import time

import numpy as np

from pats import pipeline
from pats._backend import get_kernels


def textured(h, w, seed=20260810, sigma=12):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w]
    base = np.sin(xx / 17) * 60 + np.cos(yy / 23) * 60 + 128
    img = np.stack([base, np.roll(base, 9, 0), np.roll(base, 5, 1)], -1)
    return np.clip(img + rng.normal(0, sigma, size=img.shape), 0, 255).astype(np.uint8)


def time_run(img, kernels, reps):
    best = float("inf")
    res = None
    for _ in range(reps):
        t0 = time.perf_counter()
        res = pipeline.run(img, kernels=kernels)
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="200x150,400x300",
                        help="comma-separated WxH list")
    parser.add_argument("--reps", type=int, default=3)
    args = parser.parse_args()

    try:
        compiled = get_kernels("compiled")
    except ImportError:
        print("compiled kernels are not built; run `pip install -e .` first")
        return 1
    pure = get_kernels("pure")

    print(f"{'size':>10} {'regions':>8} {'compiled':>10} {'pure':>10} {'speedup':>8}  identical")
    for spec in args.sizes.split(","):
        w, h = (int(v) for v in spec.split("x"))
        img = textured(h, w)
        t_c, res_c = time_run(img, compiled, args.reps)
        t_p, res_p = time_run(img, pure, max(1, args.reps - 2))
        same = (
            np.array_equal(res_c.labels, res_p.labels)
            and np.array_equal(res_c.tree.parent, res_p.tree.parent)
            and np.array_equal(res_c.sal_map.s_max, res_p.sal_map.s_max)
        )
        print(
            f"{spec:>10} {res_c.region_count:>8} {t_c * 1000:>8.1f}ms {t_p * 1000:>8.1f}ms"
            f" {t_p / t_c:>7.1f}x  {same}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
