"""Benchmark the compiled kernels against the numpy fallback.

Run from the repo root after building the extension:

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import dpboot._kernels.pykern as pykern

try:
    import dpboot._kernels._ckern as ckern
except ImportError:
    ckern = None


def bench(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    vals_small = np.sort(np.random.default_rng(0).normal(size=58))
    vals_big = np.sort(np.random.default_rng(1).normal(size=150))
    cases = [
        ("uniform_block 5M", "uniform_block", (0, 1, 0, 5_000_000)),
        ("resample_means m=58 n=1000 N=269", "resample_means", (vals_small, 1000, 269, 0, 1)),
        ("resample_means m=150 n=3000 N=1026", "resample_means", (vals_big, 3000, 1026, 0, 1)),
        ("resample_medians m=58 n=1000 N=269", "resample_medians", (vals_small, 1000, 269, 0, 1)),
        (
            "resample_privmedians m=58 n=1000 N=269",
            "resample_privmedians",
            (vals_small, 1000, 269, 4.0, 1e-3, -6.0, 6.0, 0, 1),
        ),
    ]
    print(f"{'kernel':<42}{'numpy':>10}{'cython':>10}{'speedup':>9}")
    for label, name, args in cases:
        t_py = bench(getattr(pykern, name), *args)
        if ckern is None:
            print(f"{label:<42}{t_py * 1e3:>8.1f}ms{'-':>10}{'-':>9}")
            continue
        t_c = bench(getattr(ckern, name), *args)
        print(f"{label:<42}{t_py * 1e3:>8.1f}ms{t_c * 1e3:>8.1f}ms{t_py / t_c:>8.1f}x")
    if ckern is None:
        print("\ncompiled backend not built; run `pip install -e .` first")


if __name__ == "__main__":
    main()
