#!/usr/bin/env python3
"""Benchmark the compiled scoring kernel against the pure-Python fallback.

Times (a) the raw pair-scoring kernel on a synthetic link graph and (b) an
end-to-end traversal with each backend swapped in. Run from the repo root:

    python benchmarks/bench_kernels.py [--nodes 20000] [--degree 20] [--pairs 200000]
"""

import argparse
import importlib.util
import random
import time

import numpy as np

from topicforge import _ngdpy, kernels
from topicforge.linkindex import build_index
from topicforge.ngd import traverse

COMPILED = importlib.util.find_spec("topicforge._ngdkern") is not None
if COMPILED:
    from topicforge import _ngdkern


def synthetic_graph(rng, n_nodes, degree):
    """Edge list with hub bias so inlink sets overlap like a real link graph."""
    hubs = max(4, n_nodes // 50)
    edges = []
    for src in range(n_nodes):
        for _ in range(rng.randint(1, degree)):
            if rng.random() < 0.3:
                dst = rng.randrange(hubs)
            else:
                dst = rng.randrange(n_nodes)
            edges.append((f"a{src}", f"a{dst}"))
    return edges


def time_call(fn, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nodes", type=int, default=20_000)
    parser.add_argument("--degree", type=int, default=20)
    parser.add_argument("--pairs", type=int, default=200_000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    print(f"building graph: {args.nodes} nodes, <= {args.degree} links each ...")
    index = build_index(synthetic_graph(rng, args.nodes, args.degree))
    indptr, indices = index.in_csr
    n = index.total_articles
    print(f"graph ready: {n} articles, {indices.size} inbound links")

    pair_rng = np.random.default_rng(args.seed)
    a_ids = pair_rng.integers(0, n, args.pairs).astype(np.int32)
    b_ids = pair_rng.integers(0, n, args.pairs).astype(np.int32)

    rows = []
    backends = [("pure", _ngdpy)]
    if COMPILED:
        backends.append(("compiled", _ngdkern))
    baseline = None
    reference = None
    for name, module in backends:
        seconds, scores = time_call(
            lambda m=module: m.score_pairs(indptr, indices, a_ids, b_ids, n), repeat=2
        )
        if reference is None:
            reference = scores
        else:
            assert np.array_equal(reference, scores), "backends disagree"
        rate = args.pairs / seconds
        rows.append((f"score_pairs[{name}]", seconds, f"{rate:,.0f} pairs/s"))
        if name == "pure":
            baseline = seconds

    if COMPILED and baseline is not None:
        rows.append(("kernel speedup", baseline / rows[-1][1], "x (pure/compiled)"))

    # end-to-end traversal with each backend swapped in
    seed_title = index.title_of(0)
    original = kernels.score_pairs
    try:
        for name, module in backends:
            kernels.score_pairs = module.score_pairs
            seconds, result = time_call(
                lambda: traverse(index, seed_title, threshold=0.9, max_iterations=2),
                repeat=2,
            )
            rows.append((f"traverse[{name}]", seconds, f"{len(result)} collected"))
    finally:
        kernels.score_pairs = original

    print()
    print(f"{'benchmark':<24} {'seconds':>10}   notes")
    for label, seconds, note in rows:
        print(f"{label:<24} {seconds:>10.3f}   {note}")
    if not COMPILED:
        print("\ncompiled kernel not built; run `python setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
