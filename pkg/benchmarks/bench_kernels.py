#!/usr/bin/env python3
"""Benchmark the compiled edit-script kernels against the pure-Python fallback.

Times scalar edit_distance / edit_ops calls and the batched block kernels on
random token-id sequences, printing a side-by-side table with speedups.

Usage:
    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --pairs 5000 --max-len 20 --vocab 50
"""

import argparse
import random
import sys
import time

import numpy as np

from capedit import _kernels_py

try:
    from capedit import _speedups
except ImportError:
    _speedups = None


def make_pairs(rng, n_pairs, max_len, vocab):
    pairs = []
    for _ in range(n_pairs):
        la = rng.randint(1, max_len)
        lb = rng.randint(1, max_len)
        a = np.array([rng.randrange(vocab) for _ in range(la)], dtype=np.int32)
        b = np.array([rng.randrange(vocab) for _ in range(lb)], dtype=np.int32)
        pairs.append((a, b))
    return pairs


def pack(seqs):
    flat = np.concatenate(seqs) if seqs else np.zeros(0, dtype=np.int32)
    off = np.zeros(len(seqs) + 1, dtype=np.int64)
    off[1:] = np.cumsum([len(s) for s in seqs])
    return flat.astype(np.int32), off


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_scalar(impl, pairs):
    def run():
        total = 0
        for a, b in pairs:
            total += impl.edit_distance(a, b)
        return total

    return time_call(run)


def bench_ops(impl, pairs):
    def run():
        total = 0
        for a, b in pairs:
            total += len(impl.edit_ops(a, b))
        return total

    return time_call(run)


def bench_block(impl, flat_a, off_a, flat_b, off_b, idx_a, idx_b):
    out = np.zeros(len(idx_a), dtype=np.int32)

    def run():
        impl.edit_distance_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out)
        return int(out.sum())

    return time_call(run)


def bench_steps_block(impl, flat_a, off_a, flat_b, off_b, idx_a, idx_b):
    out = np.zeros(len(idx_a), dtype=np.int32)

    def run():
        impl.edit_steps_block(flat_a, off_a, flat_b, off_b, idx_a, idx_b, out)
        return int(out.sum())

    return time_call(run)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=2000, help="random pairs per scalar benchmark")
    parser.add_argument("--block-pairs", type=int, default=200_000, help="pairs per block benchmark")
    parser.add_argument("--max-len", type=int, default=15, help="maximum sequence length")
    parser.add_argument("--vocab", type=int, default=50, help="token-id vocabulary size")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if _speedups is None:
        print("compiled extension not available; nothing to compare", file=sys.stderr)
        return 1

    rng = random.Random(args.seed)
    pairs = make_pairs(rng, args.pairs, args.max_len, args.vocab)

    n_seqs = max(2, args.pairs)
    seqs = [a for a, _ in make_pairs(rng, n_seqs, args.max_len, args.vocab)]
    flat, off = pack(seqs)
    idx_a = np.array([rng.randrange(n_seqs) for _ in range(args.block_pairs)], dtype=np.int64)
    idx_b = np.array([rng.randrange(n_seqs) for _ in range(args.block_pairs)], dtype=np.int64)

    rows = []
    for name, fn, unit_count in [
        (f"edit_distance x{args.pairs}", lambda impl: bench_scalar(impl, pairs), args.pairs),
        (f"edit_ops x{args.pairs}", lambda impl: bench_ops(impl, pairs), args.pairs),
        (
            f"edit_distance_block x{args.block_pairs}",
            lambda impl: bench_block(impl, flat, off, flat, off, idx_a, idx_b),
            args.block_pairs,
        ),
        (
            f"edit_steps_block x{args.block_pairs}",
            lambda impl: bench_steps_block(impl, flat, off, flat, off, idx_a, idx_b),
            args.block_pairs,
        ),
    ]:
        t_py, check_py = fn(_kernels_py)
        t_c, check_c = fn(_speedups)
        if check_py != check_c:
            print(f"error: backend results differ on {name}", file=sys.stderr)
            return 1
        rows.append((name, t_py, t_c, unit_count))

    width = max(len(r[0]) for r in rows)
    print(f"{'benchmark':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, t_py, t_c, count in rows:
        speedup = t_py / t_c if t_c > 0 else float("inf")
        print(f"{name:<{width}}  {t_py * 1e3:>8.1f}ms  {t_c * 1e3:>8.1f}ms  {speedup:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
