"""Independent reference implementations used to check the library.

These deliberately avoid the library's own algorithms: the WL oracle
materializes rooted subgraphs as explicit depth-k unfolding trees and
canonically serializes them; the tau oracle counts pairs directly; the
clique oracle enumerates subsets.
"""

from __future__ import annotations

import itertools

from recsel.ingest import BipartiteGraph
from recsel.wl import bucket_weight


def rooted_subgraph_certs(g: BipartiteGraph, delta: int,
                          weight_buckets: int = 5) -> list[dict[str, str]]:
    """Canonical serialization of every node's rooted subgraph at each
    depth 0..delta (the depth-k unfolding tree, children sorted)."""
    lo, hi = g.weight_range if g.weight_range is not None else (
        min(w for _, _, w in g.edges), max(w for _, _, w in g.edges))
    degree = {n: 0 for n in g.nodes}
    adjacency = {n: [] for n in g.nodes}
    for u, i, w in g.edges:
        degree[u] += 1
        degree[i] += 1
        adjacency[u].append((i, w))
        adjacency[i].append((u, w))
    base = {}
    for n in g.nodes:
        tag = "U" if n in set(g.user_nodes) else "I"
        base[n] = f"{tag}:{degree[n]}"

    def cert(node: str, depth: int) -> str:
        if depth == 0:
            return base[node]
        children = sorted(
            (cert(m, depth - 1), bucket_weight(w, lo, hi, weight_buckets))
            for m, w in adjacency[node]
        )
        inner = ";".join(f"{c}~{b}" for c, b in children)
        return f"({cert(node, depth - 1)}|{inner})"

    return [{n: cert(n, k) for n in g.nodes} for k in range(delta + 1)]


def tokens_match_certs(doc_strata, cert_levels, nodes) -> bool:
    """True iff WL tokens and oracle certs induce the same equality
    structure: a per-iteration bijection token <-> cert."""
    for level, stratum in enumerate(doc_strata):
        forward: dict[str, str] = {}
        backward: dict[str, str] = {}
        for node, token in zip(nodes, stratum):
            cert = cert_levels[level][node]
            if forward.setdefault(token, cert) != cert:
                return False
            if backward.setdefault(cert, token) != token:
                return False
    return True


def kendall_tau_pairs(order_a: tuple[str, ...], order_b: tuple[str, ...]) -> float:
    """O(n^2) pair-count tau-a."""
    ra = {x: i for i, x in enumerate(order_a)}
    rb = {x: i for i, x in enumerate(order_b)}
    concordant = discordant = 0
    for x, y in itertools.combinations(order_a, 2):
        agree = (ra[x] - ra[y]) * (rb[x] - rb[y])
        if agree > 0:
            concordant += 1
        else:
            discordant += 1
    n = len(order_a)
    return (concordant - discordant) / (n * (n - 1) / 2)


def brute_force_cliques(mean_ranks: dict[str, float], cd: float) -> set[tuple[str, ...]]:
    """All maximal strategy subsets whose internal mean-rank gap <= cd,
    found by subset enumeration."""
    names = sorted(mean_ranks, key=lambda n: (mean_ranks[n], n))
    groups = []
    for size in range(len(names), 0, -1):
        for combo in itertools.combinations(names, size):
            ranks = [mean_ranks[n] for n in combo]
            if max(ranks) - min(ranks) <= cd:
                if not any(set(combo) <= set(g) for g in groups):
                    groups.append(combo)
    return set(groups)
