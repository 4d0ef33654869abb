"""Compare the compiled Abel-sum kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from tauberkit import _kernels_py
from tauberkit.seqcore import example2

try:
    from tauberkit import _kernels as compiled
except ImportError:
    compiled = None


def cases():
    rng = np.random.default_rng(0)
    for n in (10_000, 200_000, 2_000_000):
        dense = rng.random(n)
        alpha = 1 - 10 / n
        bounds = np.array([b for b in example2().head(40) if b < n], dtype=np.int64)
        yield f"dense  n={n:>9,}", lambda m, d=dense, a=alpha: m.dense_abel_sum(d, a)
        yield f"blocks n={n:>9,}", lambda m, b=bounds, a=alpha, n=n: m.block_abel_sum(b, 1, a, n)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'case':24s} {'numpy [ms]':>11s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, fn in cases():
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{name:24s} {t_py:11.2f} {'-':>14s} {'-':>8s}")
            continue
        t_c = min(timeit.repeat(lambda: fn(compiled), number=1, repeat=args.repeat)) * 1e3
        diff = abs(fn(compiled) - fn(_kernels_py))
        print(f"{name:24s} {t_py:11.2f} {t_c:14.2f} {t_py / t_c:7.1f}x   |diff|={diff:.1e}")


if __name__ == "__main__":
    main()
