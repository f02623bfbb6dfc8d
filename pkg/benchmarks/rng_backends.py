#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-Python stream kernels.

The two backends are bit-identical by contract (tests/test_rng.py);
this script measures what the compiled extension buys. Usage:

    python3 benchmarks/rng_backends.py [count]
"""
import sys
import time

import numpy as np

from terank import _splitmix_py
from terank.rng import BACKEND

try:
    from terank import _splitmix
except ImportError:
    _splitmix = None


def bench(kernels, fill, count, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        out = np.empty(count)
        start = time.perf_counter()
        if fill == "uniform":
            kernels.fill_uniform(out, 12345)
        else:
            kernels.fill_gaussian(out, 12345, False, 0.0)
        best = min(best, time.perf_counter() - start)
    return best, out


def main():
    count = int(sys.argv[1]) if len(sys.argv) > 1 else 2_000_000
    print(f"active backend: {BACKEND}; generating {count:,} doubles per fill\n")
    rows = []
    for fill in ("uniform", "gaussian"):
        py_t, py_out = bench(_splitmix_py, fill, count)
        row = [fill, f"{count / py_t / 1e6:8.2f} M/s", "python"]
        rows.append(row)
        if _splitmix is not None:
            c_t, c_out = bench(_splitmix, fill, count)
            assert c_out.tobytes() == py_out.tobytes(), "backends diverged"
            rows.append(
                [fill, f"{count / c_t / 1e6:8.2f} M/s",
                 f"compiled ({py_t / c_t:5.1f}x faster)"]
            )
    width = max(len(r[0]) for r in rows)
    for fill, rate, which in rows:
        print(f"  {fill.ljust(width)}  {rate}  {which}")
    if _splitmix is None:
        print("\ncompiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
