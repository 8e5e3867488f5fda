#!/usr/bin/env python3
"""Compare the compiled retrieval kernels against the numpy fallback.

Three workloads:
  dense      one query block against one candidate block (bitext eval shape)
  subsets    many queries, each restricted to a small candidate list
             (sentence matching inside matched article pairs)
  mining     end-to-end mine_pairs on a synthetic comparable corpus

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from bitextkit import kernels


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_dense(backend, repeats, n_q=2000, n_c=2000, dim=128):
    rng = np.random.default_rng(0)
    q = rng.standard_normal((n_q, dim))
    c = rng.standard_normal((n_c, dim))
    return timeit(lambda: kernels.argmax_cosine(q, c, 0.5, backend=backend), repeats)


def bench_subsets(backend, repeats, n_q=20000, n_c=20000, dim=128, per_query=24):
    rng = np.random.default_rng(1)
    q = rng.standard_normal((n_q, dim))
    c = rng.standard_normal((n_c, dim))
    cand = rng.integers(0, n_c, size=(n_q, per_query)).astype(np.int64)
    offsets = np.arange(0, (n_q + 1) * per_query, per_query, dtype=np.int64)
    flat = cand.ravel()
    return timeit(lambda: kernels.argmax_cosine_subsets(q, c, offsets, flat, 0.5,
                                                        backend=backend), repeats)


def bench_mining(backend, repeats):
    from synthworld import random_world
    from bitextkit.miner import mine_pairs

    src, tgt, provider, cfg = random_world(seed=1234, max_docs=100, max_sents=20)
    previous = kernels.backend_name()

    def run():
        kernels.set_backend(backend)
        try:
            mine_pairs(src, tgt, provider, cfg)
        finally:
            kernels.set_backend(previous)

    return timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = kernels.available_backends()
    if "native" not in backends:
        print("note: native extension not built; showing pure backend only")

    workloads = [
        ("dense 2000x2000x128", bench_dense),
        ("subsets 20000q x 24cand x 128", bench_subsets),
        ("mining synthetic corpus", bench_mining),
    ]
    results = {}
    for name, fn in workloads:
        results[name] = {b: fn(b, args.repeats) for b in backends}

    width = max(len(name) for name, _ in workloads)
    header = f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    if len(backends) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, _ in workloads:
        row = f"{name:<{width}}  " + "  ".join(
            f"{results[name][b] * 1e3:>8.2f}ms" for b in backends)
        if len(backends) == 2:
            ratio = results[name]["pure"] / results[name]["native"]
            row += f"  {ratio:>7.2f}x"
        print(row)


if __name__ == "__main__":
    main()
