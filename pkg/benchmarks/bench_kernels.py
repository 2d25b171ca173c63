"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Prints one row per kernel and backend with the best wall time of the repeats.
Outputs are checked for equality before timing is reported.
"""

import argparse
import time

import numpy as np

from shiftgraphs import kernels
from shiftgraphs.debruijn import DicutInstance
from shiftgraphs.graphs import shift_graph


def cases():
    wins = np.array([[0, 1, 2, 3, 4, 5, 6, 7, 8], [1, 2, 3, 4, 5, 6, 7, 8, 9]])
    yield "window_patterns m=10", lambda b: b.window_patterns(10, wins)

    g = shift_graph(3, 40)
    indptr, indices = g.csr()
    masks = np.random.default_rng(0).random((64, g.num_vertices)) < 0.5
    starts = g.level_starts()
    yield "dag_heights shift(3,40) x64", lambda b: b.dag_heights(indptr, indices, masks, starts)

    out, inn = DicutInstance(3, 3).neighbor_arrays()
    yield "dicut_max d=3 k=3", lambda b: b.dicut_max(out, inn)
    out, inn = DicutInstance(4, 3).neighbor_arrays()
    yield "dicut_max d=4 k=3", lambda b: b.dicut_max(out, inn)


def best_time(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = kernels.backends()
    print(f"backends: {', '.join(sorted(backends))} (default {kernels.BACKEND})")
    print(f"{'kernel':32s} {'backend':8s} {'seconds':>10s} {'speedup':>8s}")
    for name, fn in cases():
        times = {}
        results = {}
        for bname, mod in sorted(backends.items()):
            times[bname], results[bname] = best_time(lambda: fn(mod), args.repeat)
        ref = results["python"]
        for bname, res in results.items():
            same = np.array_equal(np.asarray(res, dtype=object), np.asarray(ref, dtype=object)) \
                if isinstance(res, tuple) else np.array_equal(res, ref)
            if not same:
                raise SystemExit(f"{name}: {bname} disagrees with the fallback")
        for bname in sorted(times):
            speed = times["python"] / times[bname]
            print(f"{name:32s} {bname:8s} {times[bname]:10.4f} {speed:7.1f}x")


if __name__ == "__main__":
    main()
