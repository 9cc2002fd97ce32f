"""Time the numba and NumPy kernel paths against each other.

Backend selection happens once at import time, so each path runs in its
own subprocess with SCENEFUSE_NUMBA set accordingly. The parent
collects per-kernel timings and prints a comparison table.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import random
import subprocess
import sys
import time

WORDS = [
    "sun", "rise", "dock", "harbor", "call", "night", "blank", "page",
    "garden", "rose", "party", "weather", "chair", "cellar", "manifest",
]


def make_phrase(rng: random.Random, words: int) -> str:
    return " ".join(rng.choice(WORDS) for _ in range(words))


def best_of(repeats: int, fn) -> float:
    """Minimum wall time in milliseconds over ``repeats`` calls."""
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best * 1000.0


def run_worker(repeats: int) -> dict:
    from scenefuse.kernels import (
        ACTIVE,
        IMPLEMENTATIONS,
        dtw_table,
        encode_text,
        flatten_sequences,
        lcs_length_codes,
        pair_cost_matrix,
    )
    import numpy as np

    rng = random.Random(42)
    long_a = encode_text(make_phrase(rng, 120))
    long_b = encode_text(make_phrase(rng, 120))
    lines = [encode_text(make_phrase(rng, rng.randint(4, 14))) for _ in range(120)]
    cues = [encode_text(make_phrase(rng, rng.randint(4, 14))) for _ in range(150)]
    grid = np.random.default_rng(42).random((400, 500))

    # first calls absorb any compilation cost before timing starts
    lcs_length_codes(long_a, long_b)
    cost = pair_cost_matrix(lines, cues)
    dtw_table(cost)

    timings = {
        "lcs_length": best_of(repeats, lambda: lcs_length_codes(long_a, long_b)),
        "pair_cost_matrix": best_of(repeats, lambda: pair_cost_matrix(lines, cues)),
        "dtw_table": best_of(repeats, lambda: dtw_table(grid)),
    }
    return {"backend": ACTIVE, "available": sorted(IMPLEMENTATIONS), "timings": timings}


def spawn(flag_value: str, repeats: int) -> dict:
    env = dict(os.environ, SCENEFUSE_NUMBA=flag_value)
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker", "--repeats", str(repeats)],
        env=env,
        check=True,
        capture_output=True,
        text=True,
    )
    return json.loads(out.stdout)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        print(json.dumps(run_worker(args.repeats)))
        return 0

    numpy_run = spawn("0", args.repeats)
    numba_run = spawn("1", args.repeats)
    if numba_run["backend"] != "numba":
        print("numba is not importable here; both runs used the NumPy path")

    width = max(len(k) for k in numpy_run["timings"])
    print(f"{'kernel':<{width}}  {'numpy':>10}  {numba_run['backend']:>10}  {'speedup':>8}")
    for kernel, numpy_ms in numpy_run["timings"].items():
        other_ms = numba_run["timings"][kernel]
        speedup = numpy_ms / other_ms if other_ms else float("inf")
        print(
            f"{kernel:<{width}}  {numpy_ms:>8.2f}ms  {other_ms:>8.2f}ms  {speedup:>7.1f}x"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
