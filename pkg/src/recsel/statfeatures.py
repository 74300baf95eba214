"""Hand-crafted rating-matrix metafeatures.

The systematic object x function x post-function family: objects are the
rating matrix and its rows and columns; functions are the original
ratings (matrix object only), the per-object rating count, mean and sum;
post-functions are ten summary statistics applied to the resulting value
list.  Four global scalars (user/item/rating counts and density) round
out the vector.  Feature order is fixed, so two runs over the same
dataset produce identical vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyDataset, NameMismatch
from .ingest import RatingDataset


@dataclass(frozen=True)
class MetafeatureVector:
    names: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.names) != len(self.values):
            raise NameMismatch("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise NameMismatch("feature names must be unique")
        for name, value in zip(self.names, self.values):
            if not math.isfinite(value):
                raise ValueError(f"feature {name!r} is not finite")

    def as_array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.float64)


def _mode(values: np.ndarray) -> float:
    uniques, counts = np.unique(values, return_counts=True)
    return float(uniques[np.argmax(counts)])  # ties break toward the smallest value


def _entropy(values: np.ndarray) -> float:
    # natural-log entropy of the empirical distribution of distinct values
    _, counts = np.unique(values, return_counts=True)
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def _gini(values: np.ndarray) -> float:
    x = np.sort(values)
    n = x.shape[0]
    total = x.sum()
    if total == 0.0:
        return 0.0
    i = np.arange(1, n + 1)
    return float(((2 * i - n - 1) * x).sum() / (n * total))


def _skewness(values: np.ndarray) -> float:
    m = values.mean()
    m2 = ((values - m) ** 2).mean()
    if m2 == 0.0:
        return 0.0
    m3 = ((values - m) ** 3).mean()
    return float(m3 / m2 ** 1.5)


def _kurtosis(values: np.ndarray) -> float:
    # excess kurtosis from bias-uncorrected sample moments
    m = values.mean()
    m2 = ((values - m) ** 2).mean()
    if m2 == 0.0:
        return 0.0
    m4 = ((values - m) ** 4).mean()
    return float(m4 / m2 ** 2 - 3.0)


POST_FUNCTIONS = (
    ("maximum", lambda x: float(x.max())),
    ("minimum", lambda x: float(x.min())),
    ("mean", lambda x: float(x.mean())),
    ("sd", lambda x: float(x.std())),
    ("median", lambda x: float(np.median(x))),
    ("mode", _mode),
    ("entropy", _entropy),
    ("gini", _gini),
    ("skewness", _skewness),
    ("kurtosis", _kurtosis),
)


def feature_names() -> tuple[str, ...]:
    """The fixed, documented feature order."""
    names: list[str] = [f"matrix.original.{pf}" for pf, _ in POST_FUNCTIONS]
    names += ["matrix.count", "matrix.mean", "matrix.sum"]
    for obj in ("rows", "columns"):
        for fn in ("count", "mean", "sum"):
            names += [f"{obj}.{fn}.{pf}" for pf, _ in POST_FUNCTIONS]
    names += ["n_users", "n_items", "n_ratings", "density"]
    return tuple(names)


def systematic_metafeatures(d: RatingDataset) -> MetafeatureVector:
    """The full object x function x post-function vector for one dataset.

    All statistics run over canonically sorted value lists and per-object
    sums accumulate in (object, value) order, so permuting the rating
    triples or renaming users/items leaves every feature bit-identical.
    """
    if not d.ratings:
        raise EmptyDataset(f"dataset {d.name!r} has no ratings")
    values = np.array([v for _, _, v in d.ratings])
    user_idx = np.array([u for u, _, _ in d.ratings])
    item_idx = np.array([i for _, i, _ in d.ratings])
    flat = np.sort(values)

    out: list[float] = [fn(flat) for _, fn in POST_FUNCTIONS]
    out += [float(flat.size), float(flat.mean()), float(flat.sum())]

    for idx, size in ((user_idx, len(d.users)), (item_idx, len(d.items))):
        order = np.lexsort((values, idx))
        counts = np.bincount(idx, minlength=size).astype(np.float64)
        sums = np.bincount(idx[order], weights=values[order], minlength=size)
        with np.errstate(invalid="ignore"):
            means = np.where(counts > 0, sums / np.maximum(counts, 1), 0.0)
        for per_object in (counts, means, sums):
            out += [fn(np.sort(per_object)) for _, fn in POST_FUNCTIONS]

    density = flat.size / (len(d.users) * len(d.items))
    out += [float(len(d.users)), float(len(d.items)), float(flat.size), density]
    return MetafeatureVector(names=feature_names(), values=tuple(out))


def standardize(features: list[MetafeatureVector]) -> list[MetafeatureVector]:
    """Column z-scores (zero mean, unit variance); constant columns become zeros."""
    if not features:
        return []
    names = features[0].names
    for f in features[1:]:
        if f.names != names:
            raise NameMismatch("feature vectors disagree on names")
    matrix = np.vstack([f.as_array() for f in features])
    z = standardize_matrix(matrix)
    return [MetafeatureVector(names=names, values=tuple(row)) for row in z]


def standardize_matrix(matrix: np.ndarray) -> np.ndarray:
    """z-score the columns of a 2-D array; constant columns map to zeros."""
    mean = matrix.mean(axis=0)
    sd = matrix.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)
    z = (matrix - mean) / safe
    z[:, sd == 0.0] = 0.0
    return z
