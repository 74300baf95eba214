"""A small collaborative-filtering baselevel.

Four learners (GlobalAverage, UserItemBaseline, BiasedMF, MostPopular)
evaluated under seeded rating-split cross-validation with two rating-
prediction measures (RMSE, NMAE) and two item-recommendation measures
(NDCG, AUC).  Hyperparameters are fixed defaults, not tuned.

Ranking protocol (the measures need one, so it is pinned here): for each
user with held-out ratings, the candidate set is every item the user did
not rate in the training split; relevant items are the held-out ones
rated at or above the scale midpoint; candidates are ordered by model
score with ties broken by item id.  NDCG uses binary gains over all
candidates; AUC is the fraction of (relevant, non-relevant) candidate
pairs the model orders correctly.  Users without relevant or without
non-relevant candidates are skipped.  Scores average over users, then
over folds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .errors import EmptyDataset, TooFewRatings
from .ingest import RatingDataset

GLOBAL_AVERAGE = "GlobalAverage"
USER_ITEM_BASELINE = "UserItemBaseline"
BIASED_MF = "BiasedMF"
MOST_POPULAR = "MostPopular"
ALGORITHMS = (BIASED_MF, GLOBAL_AVERAGE, MOST_POPULAR, USER_ITEM_BASELINE)

RATING_MEASURES = ("NMAE", "RMSE")
RANKING_MEASURES = ("AUC", "NDCG")
MEASURES = RATING_MEASURES + RANKING_MEASURES

DEFAULT_HYPER = {
    USER_ITEM_BASELINE: {"reg": 10.0},
    BIASED_MF: {"factors": 16, "epochs": 30, "learning_rate": 0.01, "reg": 0.02},
    GLOBAL_AVERAGE: {},
    MOST_POPULAR: {},
}


@dataclass
class CFModel:
    """Fitted baselevel model; parameters depend on ``kind``."""

    kind: str
    scale: tuple[float, float]
    users: tuple[str, ...]
    items: tuple[str, ...]
    mu: float
    user_bias: np.ndarray | None = None
    item_bias: np.ndarray | None = None
    P: np.ndarray | None = None
    Q: np.ndarray | None = None
    popularity: np.ndarray | None = None
    _user_index: dict = field(default_factory=dict, repr=False)
    _item_index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._user_index = {u: k for k, u in enumerate(self.users)}
        self._item_index = {i: k for k, i in enumerate(self.items)}


def fit(kind: str, train: RatingDataset, hyper: Mapping | None = None,
        seed: int | list = 0) -> CFModel:
    """Fit one baselevel learner on ``train``."""
    if not train.ratings:
        raise EmptyDataset("cannot fit on an empty dataset")
    if kind not in DEFAULT_HYPER:
        raise ValueError(f"unknown learner kind {kind!r}")
    params = dict(DEFAULT_HYPER[kind])
    params.update(hyper or {})

    users = np.array([u for u, _, _ in train.ratings], dtype=np.int64)
    items = np.array([i for _, i, _ in train.ratings], dtype=np.int64)
    values = np.array([v for _, _, v in train.ratings])
    mu = float(values.mean())
    model = CFModel(kind=kind, scale=train.scale, users=train.users,
                    items=train.items, mu=mu)

    if kind == GLOBAL_AVERAGE:
        return model

    if kind == MOST_POPULAR:
        model.popularity = np.bincount(items, minlength=len(train.items)).astype(np.float64)
        return model

    if kind == USER_ITEM_BASELINE:
        reg = float(params["reg"])
        model.user_bias, model.item_bias = _baseline_biases(
            users, items, values, mu, len(train.users), len(train.items), reg)
        return model

    # BiasedMF: seeded SGD on mu + b_u + b_i + p_u . q_i
    rng = np.random.default_rng(seed)
    n_factors = int(params["factors"])
    model.user_bias = np.zeros(len(train.users))
    model.item_bias = np.zeros(len(train.items))
    model.P = rng.normal(0.0, 0.1, size=(len(train.users), n_factors))
    model.Q = rng.normal(0.0, 0.1, size=(len(train.items), n_factors))
    for _ in range(int(params["epochs"])):
        order = rng.permutation(values.shape[0])
        kernels.mf_epoch(model.user_bias, model.item_bias, model.P, model.Q,
                         np.ascontiguousarray(users[order]),
                         np.ascontiguousarray(items[order]),
                         np.ascontiguousarray(values[order]),
                         mu, float(params["learning_rate"]), float(params["reg"]))
    return model


def _baseline_biases(users, items, values, mu, n_users, n_items, reg):
    """Regularized closed-form sweeps: user biases first, then item biases."""
    user_counts = np.bincount(users, minlength=n_users)
    user_sums = np.bincount(users, weights=values - mu, minlength=n_users)
    b_u = user_sums / np.maximum(reg + user_counts, 1e-300)
    b_u[user_counts == 0] = 0.0
    residual = values - mu - b_u[users]
    item_counts = np.bincount(items, minlength=n_items)
    item_sums = np.bincount(items, weights=residual, minlength=n_items)
    b_i = item_sums / np.maximum(reg + item_counts, 1e-300)
    b_i[item_counts == 0] = 0.0
    return b_u, b_i


def _raw_scores(m: CFModel, user: str, item_indices: np.ndarray) -> np.ndarray:
    """Unclamped model scores for one user against a vector of item indices.

    Unknown users/items contribute no bias and no factors, so the score
    degrades gracefully to the global mean plus whatever side is known.
    """
    u = m._user_index.get(user, -1)
    scores = np.full(item_indices.shape[0], m.mu)
    if m.kind == MOST_POPULAR:
        known = item_indices >= 0
        scores = np.zeros(item_indices.shape[0])
        scores[known] = m.popularity[item_indices[known]]
        return scores
    if m.user_bias is not None and u >= 0:
        scores += m.user_bias[u]
    if m.item_bias is not None:
        known = item_indices >= 0
        scores[known] += m.item_bias[item_indices[known]]
    if m.P is not None and u >= 0:
        known = item_indices >= 0
        scores[known] += m.Q[item_indices[known]] @ m.P[u]
    return scores


def predict_rating(m: CFModel, user: str, item: str) -> float:
    """Predicted rating, clamped to the scale; MostPopular predicts the mean."""
    idx = np.array([m._item_index.get(item, -1)], dtype=np.int64)
    if m.kind == MOST_POPULAR:
        raw = m.mu
    else:
        raw = float(_raw_scores(m, user, idx)[0])
    lo, hi = m.scale
    return float(min(hi, max(lo, raw)))


def rank_items(m: CFModel, user: str, candidates: list[str]) -> list[str]:
    """Candidates sorted by unclamped model score, ties broken by item id."""
    idx = np.array([m._item_index.get(c, -1) for c in candidates], dtype=np.int64)
    scores = _raw_scores(m, user, idx)
    return [c for _, c in sorted(zip(-scores, candidates), key=lambda t: (t[0], t[1]))]


def _fold_split(n: int, folds: int, seed: int) -> list[np.ndarray]:
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, folds)


def _subset(d: RatingDataset, keep: np.ndarray) -> RatingDataset:
    # fold-train datasets keep the full user/item universe
    return RatingDataset(name=d.name, users=d.users, items=d.items,
                         ratings=tuple(d.ratings[i] for i in keep), scale=d.scale)


def _rating_errors(m: CFModel, d: RatingDataset, test: np.ndarray) -> tuple[float, float]:
    errors = np.array([
        d.ratings[t][2] - predict_rating(m, d.users[d.ratings[t][0]], d.items[d.ratings[t][1]])
        for t in test
    ])
    rmse = float(np.sqrt((errors ** 2).mean()))
    mae = float(np.abs(errors).mean())
    return rmse, mae


def _ranking_scores(m: CFModel, d: RatingDataset, train_idx: np.ndarray,
                    test_idx: np.ndarray) -> tuple[float, float] | None:
    midpoint = (d.scale[0] + d.scale[1]) / 2.0
    trained: dict[int, set[int]] = {}
    for t in train_idx:
        u, i, _ = d.ratings[t]
        trained.setdefault(u, set()).add(i)
    held: dict[int, list[tuple[int, float]]] = {}
    for t in test_idx:
        u, i, v = d.ratings[t]
        held.setdefault(u, []).append((i, v))

    ndcgs, aucs = [], []
    for u in sorted(held):
        seen = trained.get(u, set())
        relevant = {i for i, v in held[u] if v >= midpoint}
        candidates = [i for i in range(len(d.items)) if i not in seen]
        n_rel = len(relevant)
        n_non = len(candidates) - n_rel
        if n_rel == 0 or n_non == 0:
            continue
        order = rank_items(m, d.users[u], [d.items[i] for i in candidates])
        relevant_names = {d.items[i] for i in relevant}
        positions = sorted(k + 1 for k, item in enumerate(order) if item in relevant_names)
        dcg = sum(1.0 / np.log2(p + 1) for p in positions)
        idcg = sum(1.0 / np.log2(j + 1) for j in range(1, n_rel + 1))
        ndcgs.append(dcg / idcg)
        total = len(candidates)
        concordant = sum((total - p) - (n_rel - k) for k, p in enumerate(positions, start=1))
        aucs.append(concordant / (n_rel * n_non))
    if not ndcgs:
        return None
    return float(np.mean(ndcgs)), float(np.mean(aucs))


def evaluate(kind: str, d: RatingDataset, hyper: Mapping | None = None,
             folds: int = 10, seed: int = 0) -> dict[str, float]:
    """Cross-validated scores for all four measures.

    Folds are a seeded permutation of the rating list split into near-
    equal chunks; the same seed always yields the same folds.
    """
    if folds < 2:
        raise TooFewRatings("cross-validation needs at least 2 folds")
    if d.n_ratings < folds:
        raise TooFewRatings(f"{d.n_ratings} ratings cannot fill {folds} folds")
    chunks = _fold_split(d.n_ratings, folds, seed)
    rmses, maes, ndcgs, aucs = [], [], [], []
    for f, test in enumerate(chunks):
        train_idx = np.concatenate([c for g, c in enumerate(chunks) if g != f])
        model = fit(kind, _subset(d, np.sort(train_idx)), hyper, seed=[seed, f])
        rmse, mae = _rating_errors(model, d, test)
        rmses.append(rmse)
        maes.append(mae)
        ranked = _ranking_scores(model, d, np.sort(train_idx), test)
        if ranked is not None:
            ndcgs.append(ranked[0])
            aucs.append(ranked[1])
    lo, hi = d.scale
    out = {
        "RMSE": float(np.mean(rmses)),
        "NMAE": float(np.mean(maes)) / (hi - lo) if hi > lo else float(np.mean(maes)),
    }
    # ranking measures are undefined when no fold had a user with both
    # relevant and non-relevant candidates; they are omitted, never faked
    if ndcgs:
        out["NDCG"] = float(np.mean(ndcgs))
        out["AUC"] = float(np.mean(aucs))
    return out


def performance_rows(datasets: list[RatingDataset], folds: int = 10, seed: int = 0,
                     hyper: Mapping[str, Mapping] | None = None)\
        -> list[tuple[str, str, str, float]]:
    """Evaluate every learner on every dataset; rows for the performance CSV."""
    rows = []
    for d in datasets:
        for kind in ALGORITHMS:
            scores = evaluate(kind, d, (hyper or {}).get(kind), folds=folds, seed=seed)
            for measure in MEASURES:
                if measure not in scores:
                    raise TooFewRatings(
                        f"dataset {d.name!r}: measure {measure} undefined "
                        "(no user had both relevant and non-relevant candidates)")
                rows.append((d.name, kind, measure, scores[measure]))
    return rows
