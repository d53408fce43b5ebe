"""Time the numba and numpy LCS backends against each other.

Instruction texts in real corpora are a few dozen tokens, so the default
sweep centers there, with longer rows to show how the gap scales. Run:

    python3 benchmarks/bench_lcs.py
    python3 benchmarks/bench_lcs.py --lengths 16,64,256,1024 --pairs 200
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from semiforge.lcs import available_backends, lcs_length


def make_pairs(length: int, pairs: int, vocab: int, rng) -> list[tuple[np.ndarray, np.ndarray]]:
    return [
        (
            rng.integers(0, vocab, size=length).astype(np.int64),
            rng.integers(0, vocab, size=length).astype(np.int64),
        )
        for _ in range(pairs)
    ]


def bench_backend(backend: str, batches, repeats: int) -> float:
    """Best-of-N wall time in seconds for one full pass over the batch."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for a, b in batches:
            lcs_length(a, b, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--lengths", default="16,32,64,128,256", help="comma-separated sequence lengths")
    parser.add_argument("--pairs", type=int, default=100, help="random pairs per length")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats, best is kept")
    parser.add_argument("--vocab", type=int, default=50, help="token id range")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(args.seed)
    lengths = [int(part) for part in args.lengths.split(",")]

    # Trigger JIT compilation outside the timed region.
    warm = make_pairs(8, 1, args.vocab, rng)[0]
    for backend in backends:
        lcs_length(*warm, backend=backend)

    print(f"backends: {', '.join(backends)}")
    header = f"{'length':>8} {'pairs':>6}" + "".join(f" {b + ' (ms)':>14}" for b in backends)
    if len(backends) == 2:
        header += f" {'speedup':>9}"
    print(header)

    for length in lengths:
        batch = make_pairs(length, args.pairs, args.vocab, rng)
        for a, b in batch[:3]:
            got = {backend: lcs_length(a, b, backend=backend) for backend in backends}
            assert len(set(got.values())) == 1, f"backend disagreement at length {length}: {got}"
        times = [bench_backend(backend, batch, args.repeats) for backend in backends]
        row = f"{length:>8} {args.pairs:>6}" + "".join(f" {t * 1000:>14.2f}" for t in times)
        if len(times) == 2:
            row += f" {times[1] / times[0]:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
