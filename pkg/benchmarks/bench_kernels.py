#!/usr/bin/env python3
"""Benchmark the compiled sum-tree kernels against the numpy fallback.

Covers the operations that dominate solver runtime: single-index draws,
batched draws, mixed-row batched draws, and leaf updates.  Run after an
in-place build:

    python3 benchmarks/bench_kernels.py [--n 4096] [--draws 200000]
"""

import argparse
import time

import numpy as np

from sublinsolve.kernels import pytree

try:
    from sublinsolve.kernels import _ctree as ctree
except ImportError:
    ctree = None


def build_tree(rng, n):
    cap = 1 << max(0, (n - 1).bit_length())
    tree = np.zeros(2 * cap, dtype=np.float64)
    tree[cap : cap + n] = rng.random(n) + 1e-3
    pytree.rebuild(tree, cap)
    return tree, cap


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(backend, name, n, draws, rng):
    tree, cap = build_tree(rng, n)
    us = rng.random(draws)
    out = np.empty(draws, dtype=np.int64)

    single_us = rng.random(2000)

    def single():
        for u in single_us:
            backend.sample_one(tree, cap, u)

    def batch():
        backend.sample_many(tree, cap, us, out)

    m = 64
    trees = np.zeros((m, 2 * cap), dtype=np.float64)
    trees[:, cap : cap + n] = rng.random((m, n)) + 1e-3
    pytree.rebuild(trees, cap)
    rows = np.ascontiguousarray(rng.integers(0, m, size=draws))

    def batch_rows():
        backend.sample_rows_many(trees, cap, rows, us, out)

    idxs = rng.integers(0, n, size=2000)
    ws = rng.random(2000)

    def update():
        for i, w in zip(idxs, ws):
            backend.update(tree, cap, int(i), float(w))

    rows_out = {
        "single draw (2k)": timeit(single),
        f"batched draws ({draws // 1000}k)": timeit(batch),
        f"mixed-row draws ({draws // 1000}k)": timeit(batch_rows),
        "updates (2k)": timeit(update),
    }
    return name, rows_out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--draws", type=int, default=200_000)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    results = [bench(pytree, "python", args.n, args.draws, rng)]
    if ctree is not None:
        results.append(bench(ctree, "cython", args.n, args.draws, np.random.default_rng(0)))
    else:
        print("compiled backend not available; showing fallback only")

    ops = list(results[0][1].keys())
    width = max(len(o) for o in ops)
    header = f"{'operation':<{width}}  " + "  ".join(f"{name:>10}" for name, _ in results)
    if len(results) == 2:
        header += f"  {'speedup':>8}"
    print(f"\nsum-tree kernels, n={args.n}, leaf count per tree\n")
    print(header)
    print("-" * len(header))
    for op in ops:
        cells = [res[op] for _, res in results]
        line = f"{op:<{width}}  " + "  ".join(f"{c * 1e3:>8.2f}ms" for c in cells)
        if len(cells) == 2:
            line += f"  {cells[0] / cells[1]:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
