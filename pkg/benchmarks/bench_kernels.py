"""Time the numba and numpy kernel backends on the same workloads.

Usage:
    python3 benchmarks/bench_kernels.py [--n 1000] [--p 0.004] [--repeat 3]

Reports per-kernel wall time for a full all-targets pass (the shape of work
the interception engine performs) plus an end-to-end interception run.
"""

import argparse
import time

import numpy as np

import dvintercept.kernels as K
from dvintercept.graph import erdos_renyi
from dvintercept.interception import intercepted_pairs
from dvintercept.strategy import adjacent_strategy


def time_kernels(g, repeat):
    indptr, indices = g.indptr, g.indices
    n = g.n
    hops = np.full(n, -1, np.int64)
    cmask = np.zeros(n, np.bool_)
    pinned = np.zeros(n, np.int64)
    for v in range(0, n, max(1, n // 10)):
        cmask[v] = True
        pinned[v] = 1
    banned = np.zeros(n, np.bool_)
    smask = cmask
    results = {}

    def bench(name, fn):
        fn(0)  # warm up (numba JIT compile)
        best = min(
            _timed(lambda: [fn(t) for t in range(n)]) for _ in range(repeat)
        )
        results[name] = best

    bench("bfs", lambda t: K.bfs(indptr, indices, t, banned))
    bench("sync_column", lambda t: K.sync_column(indptr, indices, pinned, cmask, t))

    cols = {t: K.sync_column(indptr, indices, pinned, cmask, t)[0]
            for t in range(n)}
    bench("reach", lambda t: K.reach(indptr, indices, cols[t], t, cmask, hops,
                                     liberal=True))
    bench("path_cover", lambda t: K.path_cover(indptr, indices, t, smask))
    return results


def _timed(fn):
    start = time.perf_counter()
    fn()
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=1000)
    parser.add_argument("--p", type=float, default=0.004)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    g = erdos_renyi(args.n, args.p, args.seed)
    print(f"graph: erdos_renyi(n={args.n}, p={args.p}), m={g.m}")
    rng = np.random.default_rng(args.seed)
    C = sorted(int(v) for v in rng.permutation(g.n)[:10])

    timings = {}
    for backend in ("numpy",) + (("numba",) if K.HAVE_NUMBA else ()):
        K.set_backend(backend)
        timings[backend] = time_kernels(g, args.repeat)
        strat = adjacent_strategy(g, C)
        intercepted_pairs(g, strat)  # warm up
        timings[backend]["end_to_end"] = min(
            _timed(lambda: intercepted_pairs(g, strat))
            for _ in range(args.repeat)
        )

    names = list(next(iter(timings.values())))
    header = f"{'kernel':>12} " + " ".join(f"{b:>10}" for b in timings)
    if len(timings) > 1:
        header += f" {'speedup':>8}"
    print(header)
    for name in names:
        row = f"{name:>12} " + " ".join(
            f"{timings[b][name] * 1e3:9.2f}ms" for b in timings
        )
        if len(timings) > 1:
            row += f" {timings['numpy'][name] / timings['numba'][name]:7.2f}x"
        print(row)
    if not K.HAVE_NUMBA:
        print("numba unavailable; only the numpy backend was timed")


if __name__ == "__main__":
    main()
