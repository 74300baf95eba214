#!/usr/bin/env python3
"""Throughput comparison of the compiled and pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--updates N] [--sigma D]

Builds a synthetic SGNS workload and a matrix-factorization workload,
runs each backend on identical pre-drawn samples and reports updates per
second plus the speedup factor.
"""

import argparse
import time

import numpy as np

from recsel import kernels


def bench_sgns(backend: str, n_updates: int, sigma: int, vocab: int, k: int) -> float:
    rng = np.random.default_rng(0)
    E = rng.normal(scale=0.01, size=(64, sigma))
    C = np.zeros((vocab, sigma))
    graphs = rng.integers(64, size=n_updates).astype(np.int64)
    tokens = rng.integers(vocab, size=n_updates).astype(np.int64)
    negatives = rng.integers(vocab, size=(n_updates, k)).astype(np.int64)
    rates = np.linspace(0.025, 0.0001, n_updates)
    kernels.use_backend(backend)
    started = time.perf_counter()
    kernels.sgns_epoch(E, C, graphs, tokens, negatives, rates)
    return n_updates / (time.perf_counter() - started)


def bench_mf(backend: str, n_updates: int, factors: int) -> float:
    rng = np.random.default_rng(1)
    n_users, n_items = 500, 400
    user_bias = np.zeros(n_users)
    item_bias = np.zeros(n_items)
    P = rng.normal(scale=0.1, size=(n_users, factors))
    Q = rng.normal(scale=0.1, size=(n_items, factors))
    users = rng.integers(n_users, size=n_updates).astype(np.int64)
    items = rng.integers(n_items, size=n_updates).astype(np.int64)
    values = rng.uniform(1, 5, size=n_updates)
    kernels.use_backend(backend)
    started = time.perf_counter()
    kernels.mf_epoch(user_bias, item_bias, P, Q, users, items, values, 3.0, 0.01, 0.02)
    return n_updates / (time.perf_counter() - started)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--updates", type=int, default=200_000)
    parser.add_argument("--sigma", type=int, default=30)
    parser.add_argument("--vocab", type=int, default=20_000)
    parser.add_argument("--negatives", type=int, default=5)
    parser.add_argument("--factors", type=int, default=16)
    args = parser.parse_args()

    available = kernels.available_backends()
    print(f"available backends: {', '.join(available)}")
    results: dict[str, dict[str, float]] = {}
    for backend in available:
        sgns = bench_sgns(backend, args.updates, args.sigma, args.vocab, args.negatives)
        mf = bench_mf(backend, args.updates, args.factors)
        results[backend] = {"sgns": sgns, "mf": mf}
        print(f"{backend:>9}: sgns {sgns:12,.0f} updates/s   mf {mf:12,.0f} updates/s")
    if len(results) == 2:
        for name in ("sgns", "mf"):
            ratio = results["compiled"][name] / results["python"][name]
            print(f"{name} speedup: {ratio:.1f}x")
    kernels.use_backend("auto")


if __name__ == "__main__":
    main()
