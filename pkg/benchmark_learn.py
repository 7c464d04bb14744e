#!/usr/bin/env python3
"""
Speed check: indexed learner vs the recounting reference learner.
Run: python3 benchmark_learn.py [--types 100000] [--merges 10000]

The reference learner recounts every word on every merge, so its cost per
merge is flat; it is timed on the first --naive-merges merges and scaled up.
Target: indexed >= 10x faster. Falling short prints a report, it does not fail.
"""

import argparse
import sys
import time

import numpy as np

sys.path.insert(0, '.')

from bpe_learn import LearnConfig, learn_bpe, learn_bpe_indexed
from core_model import WordFrequencyTable

TARGET_SPEEDUP = 10.0
ALPHABET = list("abcdefghijklmnopqrstuvwxyz")


def synthetic_table(n_types, seed=13):
    """Random words with Zipf-distributed counts"""
    rng = np.random.default_rng(seed)
    counts = {}
    while len(counts) < n_types:
        length = int(rng.integers(3, 13))
        word = "".join(rng.choice(ALPHABET, size=length))
        counts[word] = int(min(rng.zipf(1.6), 100000))
    return WordFrequencyTable(counts)


def timed(learner, table, merges):
    start = time.perf_counter()
    result = learner(table, LearnConfig(num_merges=merges, min_frequency=1))
    return result, time.perf_counter() - start


def main() -> None:
    parser = argparse.ArgumentParser(
        description="Compare learner speed on a synthetic word table.",
        epilog="""
Examples:
  python3 benchmark_learn.py
      Full-size run (100k types, 10k merges).
  python3 benchmark_learn.py --types 5000 --merges 500 --naive-merges 500
      Quick run, no extrapolation.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--types", type=int, default=100000, help="Distinct words in the table")
    parser.add_argument("--merges", type=int, default=10000, help="Merges for the indexed learner")
    parser.add_argument("--naive-merges", type=int, default=200,
                        help="Merges actually run by the reference learner")
    args = parser.parse_args()

    print(f"Building table with {args.types} types...")
    table = synthetic_table(args.types)

    indexed, t_indexed = timed(learn_bpe_indexed, table, args.merges)
    print(f"indexed: {indexed.executed} merges in {t_indexed:.2f}s")

    naive_merges = min(args.naive_merges, args.merges)
    naive, t_naive = timed(learn_bpe, table, naive_merges)
    per_merge = t_naive / max(naive.executed, 1)
    t_naive_full = per_merge * indexed.executed
    print(f"naive:   {naive.executed} merges in {t_naive:.2f}s "
          f"(~{t_naive_full:.1f}s for {indexed.executed})")

    if naive.pairs != indexed.pairs[:naive.executed]:
        print("MISMATCH: learners disagree on the common prefix of merges")
        sys.exit(1)

    speedup = t_naive_full / t_indexed if t_indexed else float("inf")
    print(f"\nspeedup: {speedup:.1f}x (target {TARGET_SPEEDUP:.0f}x)")
    if speedup < TARGET_SPEEDUP:
        print("below target")


if __name__ == "__main__":
    main()
