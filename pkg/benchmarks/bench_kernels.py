"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 3] [--k 32] [--repeat 3]

Both backends run on the same tables; outputs are checked for equality
before anything is timed.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from randgame import _pycore, make_shape, sample_winner_table, substream
from randgame.response import sinks
from randgame._kernels import available_backends


def _cases(w, n, k, rng):
    s = sinks(w)
    target = np.asarray(s[:1] if len(s) else [0], dtype=np.int64)
    uniforms = rng.random((2000, n))
    anchor = 0
    return {
        "win_counts": lambda m: m.win_counts(w.winners, n, k),
        "backward_reach": lambda m: m.backward_reach(w.winners, n, k, target),
        "has_cycle": lambda m: m.has_cycle(w.winners, n, k),
        "scc_labels": lambda m: m.scc_labels(w.winners, n, k),
        "reaching_lines": lambda m: m.reaching_lines(w.winners, n, k, int(target[0]), k),
        "slice_cycles": lambda m: m.slice_cycles(w.winners, n, k, anchor),
        "dynamics_block": lambda m: m.dynamics_block(w.winners, n, k, 1, 0.5, uniforms),
    }


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    return a == b


def _best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--k", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python fallback is available")
    shape = make_shape(args.n, args.k)
    w = sample_winner_table(shape, substream(args.seed, 0))
    cases = _cases(w, args.n, args.k, np.random.default_rng(args.seed))

    print(f"n={args.n} k={args.k} vertices={shape.vertex_count}")
    print(f"{'kernel':<16}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}")
    for name, call in cases.items():
        py = _best_of(lambda: call(_pycore), args.repeat)
        if "cython" in backends:
            core = backends["cython"]
            if not _same(call(_pycore), call(core)):
                raise SystemExit(f"{name}: backends disagree")
            cy = _best_of(lambda: call(core), args.repeat)
            print(f"{name:<16}{py:>12.5f}{cy:>12.5f}{py / max(cy, 1e-9):>9.1f}x")
        else:
            print(f"{name:<16}{py:>12.5f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
