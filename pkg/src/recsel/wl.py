"""Weisfeiler-Lehman relabeling and token-document extraction.

Every graph becomes a "document" whose tokens name the neighborhood
structures around its nodes, one token per node per refinement depth
0..delta.  Depth-0 tokens are the primitive labels (partition-tagged
degrees, e.g. ``U:3``); deeper tokens are compressed names assigned by
a corpus-global dictionary, so identical structures in different graphs
share the same token.

Edge weights participate through equal-width bucketing over the graph's
declared weight range (its rating scale); unbucketed reals would give
almost every neighborhood a unique name and fragment the vocabulary.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyCorpus, MalformedLine
from .ingest import BipartiteGraph

DEFAULT_WEIGHT_BUCKETS = 5
DEFAULT_SMOOTHING = 0.75


@dataclass(frozen=True)
class SubgraphDocument:
    """Token multiset describing one graph, stratified by WL depth."""

    graph_id: str
    tokens_by_iteration: tuple[tuple[str, ...], ...]

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(t for stratum in self.tokens_by_iteration for t in stratum)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.tokens_by_iteration)

    def counts(self) -> Counter:
        return Counter(self.tokens)


class WlCompressor:
    """Corpus-global dictionary mapping label signatures to short names.

    Names are assigned in first-seen order (``#0``, ``#1``, ...), which
    keeps vocabularies reproducible across runs.  The ``#`` prefix keeps
    compressed names disjoint from the primitive ``U:``/``I:`` labels.
    Thread-safe so graphs may be relabeled concurrently; the insertion
    order then changes the arbitrary names but not which slots share a
    token.
    """

    def __init__(self):
        self._names: dict[str, str] = {}
        self._lock = threading.Lock()

    def compress(self, signature: str) -> str:
        with self._lock:
            name = self._names.get(signature)
            if name is None:
                name = f"#{len(self._names)}"
                self._names[signature] = name
            return name

    def signature_of(self, name: str) -> str:
        """Inverse lookup, used by diagnostics and reference checks."""
        for sig, n in self._names.items():
            if n == name:
                return sig
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self._names)


def bucket_weight(w: float, lo: float, hi: float, buckets: int) -> int:
    """Index of ``w`` among ``buckets`` equal-width bins over [lo, hi]."""
    if hi <= lo:
        return 0
    width = (hi - lo) / buckets
    return min(buckets - 1, int((w - lo) / width))


def initial_labels(g: BipartiteGraph, weight_buckets: int = DEFAULT_WEIGHT_BUCKETS) -> dict[str, str]:
    """Label every node with its partition tag and degree (``U:3``, ``I:2``).

    The graphs carry no intrinsic node labels, so degrees seed the WL
    refinement; the partition tag keeps user and item neighborhoods
    distinguishable.
    """
    if weight_buckets < 1:
        raise ValueError("weight_buckets must be >= 1")
    degree = {n: 0 for n in g.nodes}
    for u, i, _ in g.edges:
        degree[u] += 1
        degree[i] += 1
    labels = {}
    for n in g.user_nodes:
        labels[n] = f"U:{degree[n]}"
    for n in g.item_nodes:
        labels[n] = f"I:{degree[n]}"
    return labels


def _weight_range(g: BipartiteGraph) -> tuple[float, float]:
    if g.weight_range is not None:
        return g.weight_range
    weights = [w for _, _, w in g.edges]
    if not weights:
        return (0.0, 0.0)
    return (min(weights), max(weights))


def wl_iterations(g: BipartiteGraph, labels: dict[str, str], delta: int,
                  weight_buckets: int = DEFAULT_WEIGHT_BUCKETS,
                  compressor: WlCompressor | None = None) -> list[dict[str, str]]:
    """Label maps for depths 0..delta.

    At each depth every node's new label compresses its previous label
    together with the sorted list of (neighbor label, weight bucket)
    pairs; sorting makes the signature canonical, so it is invariant
    under node-id permutations.
    """
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if weight_buckets < 1:
        raise ValueError("weight_buckets must be >= 1")
    missing = [n for n in g.nodes if n not in labels]
    if missing:
        raise MalformedLine(f"labels missing for nodes {missing[:3]}")
    if compressor is None:
        compressor = WlCompressor()
    lo, hi = _weight_range(g)
    adjacency = g.adjacency()

    history = [dict(labels)]
    current = labels
    for _ in range(delta):
        nxt = {}
        for n in g.nodes:
            neighborhood = sorted(
                (current[m], bucket_weight(w, lo, hi, weight_buckets))
                for m, w in adjacency[n]
            )
            signature = current[n] + "|" + ";".join(f"{lbl},{b}" for lbl, b in neighborhood)
            nxt[n] = compressor.compress(signature)
        history.append(nxt)
        current = nxt
    return history


def wl_relabel(g: BipartiteGraph, labels: dict[str, str], delta: int,
               weight_buckets: int = DEFAULT_WEIGHT_BUCKETS,
               compressor: WlCompressor | None = None,
               graph_id: str = "g") -> SubgraphDocument:
    """Document of every node's label at every depth 0..delta.

    The document length is therefore ``n_nodes * (delta + 1)`` and the
    multiset of tokens is what downstream embedding training consumes.
    """
    history = wl_iterations(g, labels, delta, weight_buckets, compressor)
    strata = tuple(tuple(level[n] for n in g.nodes) for level in history)
    return SubgraphDocument(graph_id=graph_id, tokens_by_iteration=strata)


@dataclass(frozen=True)
class Vocabulary:
    """Dense token index plus the negative-sampling noise distribution."""

    token_index: dict[str, int]
    counts: dict[str, int]
    noise_distribution: np.ndarray = field(compare=False)

    def __len__(self) -> int:
        return len(self.token_index)

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self.token_index)


def build_vocabulary(docs: list[SubgraphDocument],
                     smoothing: float = DEFAULT_SMOOTHING) -> Vocabulary:
    """Index all distinct tokens and derive noise probabilities ~ count**smoothing.

    Indices follow first appearance across the corpus; smoothing = 0
    yields a uniform noise distribution.
    """
    if not docs:
        raise EmptyCorpus("cannot build a vocabulary from zero documents")
    token_index: dict[str, int] = {}
    counts: Counter = Counter()
    for doc in docs:
        for token in doc.tokens:
            token_index.setdefault(token, len(token_index))
            counts[token] += 1
    weights = np.array([counts[t] for t in token_index], dtype=np.float64) ** smoothing
    noise = weights / weights.sum()
    return Vocabulary(token_index=token_index, counts=dict(counts), noise_distribution=noise)


def export_documents(docs: list[SubgraphDocument]) -> str:
    """One line per document: ``graphId token token ...``."""
    return "".join(f"{doc.graph_id} " + " ".join(doc.tokens) + "\n" for doc in docs)
