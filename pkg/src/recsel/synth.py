"""Synthetic rating-dataset generators.

Four structurally distinct families at collaborative-filtering-like
sparsity (real rating matrices are mostly empty), used by the end-to-end
tests and handy for demo runs.  Each family induces a different
baselevel winner:

* dense-uniform: an order of magnitude denser than the others, ratings
  pure noise; nothing beats the global mean and factor models overfit.
* popularity-skewed: long-tailed item popularity where popular items are
  also better liked; item biases and popularity ranking dominate.
* sparse-random: very low density, uniform noise; hardly any evidence
  per user or item.
* block-structured: matched user/item communities with high in-block
  ratings; only interaction models capture it.

All draws come from a seeded PCG64 generator, so a (kind, name, seed)
triple always yields the same dataset.
"""

from __future__ import annotations

import numpy as np

from .ingest import RatingDataset

FAMILIES = ("dense-uniform", "popularity-skewed", "sparse-random", "block-structured")


def _dataset_from_matrix(name: str, mask: np.ndarray, values: np.ndarray,
                         scale: tuple[float, float]) -> RatingDataset:
    """Assemble triples row-major; users/items without ratings are dropped."""
    triples = [(f"u{u}", f"i{i}", float(values[u, i]))
               for u, i in np.argwhere(mask)]
    users: dict[str, int] = {}
    items: dict[str, int] = {}
    ratings = []
    for user, item, value in triples:
        ratings.append((users.setdefault(user, len(users)),
                        items.setdefault(item, len(items)), value))
    return RatingDataset(name=name, users=tuple(users), items=tuple(items),
                         ratings=tuple(ratings), scale=scale)


def _clamp_round(raw: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.clip(np.round(raw), lo, hi)


def generate(kind: str, name: str, seed: int,
             scale: tuple[float, float] = (1.0, 5.0)) -> RatingDataset:
    if kind not in FAMILIES:
        raise ValueError(f"unknown generator family {kind!r}")
    rng = np.random.default_rng(seed)
    lo, hi = scale
    n_users = int(rng.integers(130, 180))
    n_items = int(rng.integers(90, 130))

    if kind == "dense-uniform":
        mask = rng.random((n_users, n_items)) < rng.uniform(0.10, 0.14)
        values = rng.integers(int(lo), int(hi) + 1, size=(n_users, n_items)).astype(float)

    elif kind == "popularity-skewed":
        rank = np.arange(1, n_items + 1, dtype=float)
        popularity = rank ** -1.1
        popularity /= popularity.sum()
        mask = rng.random((n_users, n_items)) < np.minimum(
            0.9, popularity * n_items * rng.uniform(0.030, 0.045))
        quality = hi - (hi - lo) * 0.85 * (rank - 1) / max(1, n_items - 1)
        raw = quality[None, :] + rng.normal(0.0, 0.5, size=(n_users, n_items))
        values = _clamp_round(raw, lo, hi)

    elif kind == "sparse-random":
        mask = rng.random((n_users, n_items)) < rng.uniform(0.012, 0.020)
        values = rng.integers(int(lo), int(hi) + 1, size=(n_users, n_items)).astype(float)

    else:  # block-structured
        n_blocks = int(rng.integers(3, 5))
        user_block = rng.integers(n_blocks, size=n_users)
        item_block = rng.integers(n_blocks, size=n_items)
        match = user_block[:, None] == item_block[None, :]
        mask = rng.random((n_users, n_items)) < np.where(match, 0.11, 0.012)
        raw = np.where(match, hi - 0.4, lo + 0.6) + rng.normal(0.0, 0.4,
                                                               size=(n_users, n_items))
        values = _clamp_round(raw, lo, hi)

    # every user needs one rating so the bipartite graph has no isolates
    for u in range(n_users):
        if not mask[u].any():
            mask[u, int(rng.integers(n_items))] = True
    return _dataset_from_matrix(name, mask, values, scale)


def corpus(per_family: int, seed: int = 0,
           scale: tuple[float, float] = (1.0, 5.0)) -> list[RatingDataset]:
    """``per_family`` datasets of each family with derived seeds."""
    out = []
    for f, kind in enumerate(FAMILIES):
        for j in range(per_family):
            out.append(generate(kind, f"{kind}-{j:02d}", seed * 100003 + f * 1009 + j, scale))
    return out
