"""Whole-graph distributed representations via skipgram with negative sampling.

Each graph is an entity that must "predict" the tokens of its own WL
document: for every (graph, token) occurrence, the graph's
representation row is pulled toward the token's context vector and
pushed away from a handful of noise tokens.  Rows of the trained
representation matrix are the learned metafeatures.

Training is deterministic for a fixed seed and backend: sample draws and
learning rates are precomputed with PCG64 streams shared by both
kernel backends, then handed to the active inner loop.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import kernels
from .errors import EmptyCorpus, ShapeMismatch, UnknownToken
from .wl import SubgraphDocument, Vocabulary

DEFAULT_SIGMA = 30
DEFAULT_EPOCHS = 100
DEFAULT_LEARNING_RATE = 0.025
DEFAULT_MIN_LEARNING_RATE = 0.0001
DEFAULT_NEGATIVES = 5


@dataclass(frozen=True)
class TrainConfig:
    sigma: int = DEFAULT_SIGMA
    epochs: int = DEFAULT_EPOCHS
    learning_rate: float = DEFAULT_LEARNING_RATE
    negatives: int = DEFAULT_NEGATIVES
    seed: int = 0
    min_learning_rate: float = DEFAULT_MIN_LEARNING_RATE
    # None keeps the fixed epoch budget; a value stops early once the
    # relative epoch-loss change falls below it.
    early_stop_rel_tol: float | None = None

    def __post_init__(self):
        if self.sigma < 1 or self.epochs < 1 or self.negatives < 1:
            raise ValueError("sigma, epochs and negatives must be positive")
        if self.learning_rate <= 0 or self.min_learning_rate < 0:
            raise ValueError("learning rates must be positive")
        if self.min_learning_rate > self.learning_rate:
            raise ValueError("min_learning_rate must not exceed learning_rate")


@dataclass
class EmbeddingModel:
    """Representation matrix E (one row per graph) and context matrix C
    (one row per vocabulary token)."""

    E: np.ndarray
    C: np.ndarray
    sigma: int
    epoch_mean_loss: list[float] = field(default_factory=list)

    @property
    def n_graphs(self) -> int:
        return self.E.shape[0]


def init_model(num_graphs: int, vocab: Vocabulary, cfg: TrainConfig) -> EmbeddingModel:
    """Fresh model: E ~ U[-0.5/sigma, 0.5/sigma) under the seed, C all zeros."""
    if num_graphs < 1:
        raise ValueError("num_graphs must be >= 1")
    rng = np.random.default_rng([cfg.seed, 0])
    half = 0.5 / cfg.sigma
    E = rng.uniform(-half, half, size=(num_graphs, cfg.sigma))
    C = np.zeros((len(vocab), cfg.sigma))
    return EmbeddingModel(E=E, C=C, sigma=cfg.sigma)


def sgns_loss(v: np.ndarray, c_pos: np.ndarray, c_negs: list[np.ndarray]) -> float:
    """-ln s(v.c_pos) - sum_j ln s(-v.c_neg_j), evaluated overflow-safely."""
    loss = np.logaddexp(0.0, -(np.asarray(v) @ np.asarray(c_pos)))
    for c in c_negs:
        loss += np.logaddexp(0.0, np.asarray(v) @ np.asarray(c))
    return float(loss)


def sgns_gradients(v, c_pos, c_negs):
    """Analytic gradients of :func:`sgns_loss` w.r.t. v, c_pos and each c_neg."""
    v = np.asarray(v, dtype=np.float64)
    c_pos = np.asarray(c_pos, dtype=np.float64)
    a = expit(v @ c_pos) - 1.0
    g_v = a * c_pos
    g_pos = a * v
    g_negs = []
    for c in c_negs:
        c = np.asarray(c, dtype=np.float64)
        b = expit(v @ c)
        g_v = g_v + b * c
        g_negs.append(b * v)
    return g_v, g_pos, g_negs


def draw_negatives(rng: np.random.Generator, cumulative: np.ndarray,
                   positives: np.ndarray, k: int) -> np.ndarray:
    """k noise-token indices per update, never equal to the positive token.

    Draws invert the cumulative noise distribution; collisions with the
    positive are redrawn until clear.  Shared by both kernel backends so
    the RNG stream is backend-independent.
    """
    if cumulative.shape[0] < 2:
        raise EmptyCorpus("negative sampling needs at least 2 distinct tokens")
    negs = np.searchsorted(cumulative, rng.random((positives.shape[0], k)), side="right")
    collision = negs == positives[:, None]
    while collision.any():
        redraw = np.searchsorted(cumulative, rng.random(int(collision.sum())), side="right")
        negs[collision] = redraw
        collision = negs == positives[:, None]
    return negs.astype(np.int64)


def _corpus_arrays(docs: list[SubgraphDocument], vocab: Vocabulary):
    graphs = []
    tokens = []
    for g, doc in enumerate(docs):
        for token in doc.tokens:
            idx = vocab.token_index.get(token)
            if idx is None:
                raise UnknownToken(f"document {doc.graph_id!r} has token {token!r} "
                                   "missing from the vocabulary")
            graphs.append(g)
            tokens.append(idx)
    return np.asarray(graphs, dtype=np.int64), np.asarray(tokens, dtype=np.int64)


def train(docs: list[SubgraphDocument], vocab: Vocabulary, cfg: TrainConfig) -> EmbeddingModel:
    """Train representations for ``docs`` by SGNS gradient descent.

    One update per (graph, token) occurrence per epoch, in document
    order; the learning rate decays linearly from ``learning_rate`` to
    ``min_learning_rate`` across all scheduled updates.  Records the mean
    pre-update loss of every epoch on the returned model.
    """
    if not docs:
        raise EmptyCorpus("no documents to train on")
    graphs, tokens = _corpus_arrays(docs, vocab)
    n = graphs.shape[0]
    model = init_model(len(docs), vocab, cfg)
    rng = np.random.default_rng([cfg.seed, 1])
    cumulative = np.cumsum(vocab.noise_distribution)
    cumulative[-1] = 1.0  # guard against round-off at the top end
    total = cfg.epochs * n
    # update t of total gets lr + (min_lr - lr) * t / (total - 1)
    slope = (cfg.min_learning_rate - cfg.learning_rate) / max(1, total - 1)

    for epoch in range(cfg.epochs):
        negatives = draw_negatives(rng, cumulative, tokens, cfg.negatives)
        rates = cfg.learning_rate + slope * np.arange(epoch * n, (epoch + 1) * n,
                                                      dtype=np.float64)
        loss = kernels.sgns_epoch(model.E, model.C, graphs, tokens, negatives, rates)
        model.epoch_mean_loss.append(loss / n)
        if (cfg.early_stop_rel_tol is not None and epoch > 0):
            prev, cur = model.epoch_mean_loss[-2], model.epoch_mean_loss[-1]
            if abs(prev - cur) < cfg.early_stop_rel_tol * max(abs(prev), 1e-12):
                break
    if not np.isfinite(model.E).all() or not np.isfinite(model.C).all():
        raise FloatingPointError("training produced non-finite parameters")
    return model


def export_metafeatures(m: EmbeddingModel, names: list[str]) -> dict[str, np.ndarray]:
    """Row-wise view of E keyed by graph id, order-preserving."""
    if len(names) != m.n_graphs:
        raise ShapeMismatch(f"{len(names)} names for {m.n_graphs} representation rows")
    return {name: m.E[i].copy() for i, name in enumerate(names)}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def metafeatures_to_csv(table: dict[str, np.ndarray]) -> str:
    """CSV ``dataset,e1,...,eS`` with 17 significant digits (exact round-trip)."""
    rows = list(table.items())
    if not rows:
        raise ShapeMismatch("empty metafeature table")
    sigma = len(rows[0][1])
    out = io.StringIO()
    out.write("dataset," + ",".join(f"e{j + 1}" for j in range(sigma)) + "\n")
    for name, vec in rows:
        if len(vec) != sigma:
            raise ShapeMismatch(f"row {name!r} has {len(vec)} values, expected {sigma}")
        out.write(name + "," + ",".join(_fmt(v) for v in vec) + "\n")
    return out.getvalue()


def metafeatures_from_csv(text: str) -> dict[str, np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln]
    if len(lines) < 2:
        raise ShapeMismatch("metafeature CSV needs a header and at least one row")
    width = len(lines[0].split(",")) - 1
    table: dict[str, np.ndarray] = {}
    for ln in lines[1:]:
        name, *values = ln.split(",")
        if len(values) != width:
            raise ShapeMismatch(f"row {name!r} has {len(values)} values, expected {width}")
        table[name] = np.array([float(v) for v in values])
    return table


def save_model(m: EmbeddingModel, names: list[str]) -> str:
    """Checkpoint: header ``numGraphs |V| sigma``, then graph ids, E rows, C rows."""
    if len(names) != m.n_graphs:
        raise ShapeMismatch(f"{len(names)} names for {m.n_graphs} representation rows")
    out = io.StringIO()
    out.write(f"{m.E.shape[0]} {m.C.shape[0]} {m.sigma}\n")
    out.write(" ".join(names) + "\n")
    for row in m.E:
        out.write(" ".join(_fmt(v) for v in row) + "\n")
    for row in m.C:
        out.write(" ".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


def load_model(text: str) -> tuple[EmbeddingModel, list[str]]:
    lines = text.splitlines()
    n_graphs, n_tokens, sigma = (int(x) for x in lines[0].split())
    names = lines[1].split(" ")
    if len(names) != n_graphs:
        raise ShapeMismatch("checkpoint header disagrees with id row")
    rows = [np.array([float(v) for v in ln.split(" ")]) for ln in lines[2:2 + n_graphs + n_tokens]]
    E = np.vstack(rows[:n_graphs])
    C = np.vstack(rows[n_graphs:]) if n_tokens else np.zeros((0, sigma))
    if E.shape[1] != sigma or (n_tokens and C.shape[1] != sigma):
        raise ShapeMismatch("checkpoint rows disagree with header sigma")
    return EmbeddingModel(E=E, C=C, sigma=sigma), names


def distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(math.sqrt(((a - b) ** 2).sum()))
