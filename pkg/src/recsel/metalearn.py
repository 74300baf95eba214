"""Label-ranking metalearning over dataset metafeatures.

Metatargets are total orders of the baselevel algorithms built from one
or more evaluation measures (direction-aware fractional ranks averaged
across measures, name-ascending tie-break).  The metalearner is a KNN
label ranker: neighbors vote by mean rank (Borda) over standardized
Euclidean space.  Average Rankings is the feature-blind baseline, and
metamodels are scored with Kendall's tau under leave-one-out CV.
"""

from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import (
    AlgorithmSetMismatch,
    EmptyMetabase,
    KTooLarge,
    LengthMismatch,
    MissingMeasure,
    NameMismatch,
    TooFewRows,
)
from .ingest import LOWER_BETTER, PerformanceTable
from .statfeatures import MetafeatureVector


@dataclass(frozen=True)
class Ranking:
    """Total order of algorithms; position in ``order`` is rank - 1."""

    order: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.order)) != len(self.order):
            raise AlgorithmSetMismatch("ranking repeats an algorithm")

    def rank_of(self, algorithm: str) -> int:
        return self.order.index(algorithm) + 1

    def ranks(self) -> dict[str, int]:
        return {alg: pos + 1 for pos, alg in enumerate(self.order)}


@dataclass(frozen=True)
class MetaDatabase:
    """Aligned rows of (dataset id, metafeatures, target ranking)."""

    rows: tuple[tuple[str, MetafeatureVector, Ranking], ...]

    def __post_init__(self):
        if not self.rows:
            raise EmptyMetabase("metadatabase needs at least one row")
        ids = [r[0] for r in self.rows]
        if len(set(ids)) != len(ids):
            raise LengthMismatch("one row per dataset: duplicate dataset id")
        names = self.rows[0][1].names
        algs = set(self.rows[0][2].order)
        for _, feats, target in self.rows[1:]:
            if feats.names != names:
                raise NameMismatch("rows disagree on feature names")
            if set(target.order) != algs:
                raise AlgorithmSetMismatch("rows disagree on the algorithm set")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.rows[0][1].names

    @property
    def algorithms(self) -> tuple[str, ...]:
        return tuple(sorted(self.rows[0][2].order))

    def feature_matrix(self) -> np.ndarray:
        return np.vstack([feats.as_array() for _, feats, _ in self.rows])

    def without(self, index: int) -> "MetaDatabase":
        return MetaDatabase(rows=self.rows[:index] + self.rows[index + 1:])


def _order_by_mean_rank(mean_ranks: Mapping[str, float]) -> Ranking:
    return Ranking(order=tuple(sorted(mean_ranks, key=lambda a: (mean_ranks[a], a))))


def build_metatarget(t: PerformanceTable, dataset: str, measures: Sequence[str]) -> Ranking:
    """Single ranking from several measures.

    Per measure, algorithms get direction-aware fractional ranks (rank 1
    is best); per-measure ranks are averaged and the result is totalised
    by sorting on (average rank, algorithm name).
    """
    algorithms = t.algorithms(dataset)
    if not algorithms:
        raise MissingMeasure(f"dataset {dataset!r} absent from the table")
    if not measures:
        raise MissingMeasure("at least one measure required")
    accumulated = np.zeros(len(algorithms))
    for measure in measures:
        if measure not in t.directions:
            raise MissingMeasure(f"measure {measure!r} has no declared direction")
        try:
            scores = np.array([t.score(dataset, alg, measure) for alg in algorithms])
        except KeyError:
            raise MissingMeasure(f"measure {measure!r} missing for dataset {dataset!r}") from None
        if t.directions[measure] == LOWER_BETTER:
            accumulated += rankdata(scores, method="average")
        else:
            accumulated += rankdata(-scores, method="average")
    mean_ranks = dict(zip(algorithms, accumulated / len(measures)))
    return _order_by_mean_rank(mean_ranks)


def assemble(features: Sequence[MetafeatureVector], targets: Sequence[Ranking],
             ids: Sequence[str]) -> MetaDatabase:
    """Row-align features, targets and dataset ids into a metadatabase."""
    if not features and not targets and not ids:
        raise EmptyMetabase("nothing to assemble")
    if not (len(features) == len(targets) == len(ids)):
        raise LengthMismatch(
            f"{len(features)} feature vectors, {len(targets)} targets, {len(ids)} ids")
    return MetaDatabase(rows=tuple(zip(ids, features, targets)))


def _standardizer(matrix: np.ndarray):
    mean = matrix.mean(axis=0)
    sd = matrix.std(axis=0)
    safe = np.where(sd == 0.0, 1.0, sd)

    def transform(x: np.ndarray) -> np.ndarray:
        z = (x - mean) / safe
        if z.ndim == 1:
            z[sd == 0.0] = 0.0
        else:
            z[:, sd == 0.0] = 0.0
        return z

    return transform


def knn_label_rank(db: MetaDatabase, query: MetafeatureVector, k: int) -> Ranking:
    """Borda vote of the k nearest neighbors in standardized feature space.

    Standardization is fit on ``db`` only and applied to the query, so
    the query never influences the scaling.  Distance ties break by
    dataset id, rank ties by algorithm name.
    """
    if k < 1 or k > len(db):
        raise KTooLarge(f"k={k} outside 1..{len(db)}")
    if query.names != db.feature_names:
        raise NameMismatch("query feature names do not match the metadatabase")
    matrix = db.feature_matrix()
    transform = _standardizer(matrix)
    z = transform(matrix)
    q = transform(query.as_array())
    distances = np.sqrt(((z - q) ** 2).sum(axis=1))
    ranked = sorted(range(len(db)), key=lambda i: (distances[i], db.rows[i][0]))
    neighbors = [db.rows[i][2] for i in ranked[:k]]
    mean_ranks = {
        alg: float(np.mean([nb.rank_of(alg) for nb in neighbors]))
        for alg in db.algorithms
    }
    return _order_by_mean_rank(mean_ranks)


def average_rankings(db: MetaDatabase) -> Ranking:
    """Mean rank of each algorithm across all rows, independent of any query."""
    mean_ranks = {
        alg: float(np.mean([target.rank_of(alg) for _, _, target in db.rows]))
        for alg in db.algorithms
    }
    return _order_by_mean_rank(mean_ranks)


def kendall_tau(a: Ranking, b: Ranking) -> float:
    """Tau-a over two total orders: (concordant - discordant) / (n(n-1)/2)."""
    if set(a.order) != set(b.order):
        raise AlgorithmSetMismatch("rankings cover different algorithm sets")
    items = a.order
    n = len(items)
    if n < 2:
        return 1.0
    ra, rb = a.ranks(), b.ranks()
    balance = 0
    for x, y in itertools.combinations(items, 2):
        da = ra[x] - ra[y]
        db_ = rb[x] - rb[y]
        balance += 1 if da * db_ > 0 else -1
    return balance / (n * (n - 1) / 2)


Learner = Callable[[MetaDatabase, MetafeatureVector], Ranking]


def knn_learner(k: int) -> Learner:
    return lambda db, query: knn_label_rank(db, query, k)


def average_rankings_learner() -> Learner:
    return lambda db, query: average_rankings(db)


def loocv_predictions(db: MetaDatabase, learner: Learner,
                      learner_params: Mapping | None = None) -> list[tuple[str, Ranking]]:
    """Per held-out dataset, the ranking predicted by a model trained on
    the remaining rows (standardization included, so the held-out row
    never leaks into scaling or voting)."""
    if len(db) < 2:
        raise TooFewRows("leave-one-out needs at least 2 rows")
    if learner_params:
        base = learner
        learner = lambda d, q: base(d, q, **dict(learner_params))  # noqa: E731
    out = []
    for i, (dataset_id, feats, _) in enumerate(db.rows):
        out.append((dataset_id, learner(db.without(i), feats)))
    return out


def loocv(db: MetaDatabase, learner: Learner,
          learner_params: Mapping | None = None) -> list[tuple[str, float]]:
    """Leave-one-out evaluation: per held-out dataset, tau between the
    prediction trained on the rest and the true target."""
    predictions = loocv_predictions(db, learner, learner_params)
    targets = {dataset_id: target for dataset_id, _, target in db.rows}
    return [(dataset_id, kendall_tau(predicted, targets[dataset_id]))
            for dataset_id, predicted in predictions]


def mean_tau(scores: Sequence[tuple[str, float]]) -> float:
    return float(np.mean([t for _, t in scores]))


DEFAULT_GRID = {
    "theta": (25, 50, 100, 200),
    "sigma": (30,),
    "delta": (6,),
    "epochs": (100,),
    "learning_rate": (0.025,),
    "negatives": (5,),
    "knn_k": (1, 2, 3),
}


@dataclass(frozen=True)
class GridSpec:
    """Named hyperparameter lists; the grid is their Cartesian product."""

    params: dict[str, tuple] = field(default_factory=lambda: dict(DEFAULT_GRID))

    def __post_init__(self):
        for name, options in self.params.items():
            if not options:
                raise ValueError(f"grid list {name!r} is empty")

    def configurations(self) -> list[dict]:
        names = list(self.params)
        return [dict(zip(names, combo))
                for combo in itertools.product(*(self.params[n] for n in names))]


PipelineBuilder = Callable[[dict, MetaDatabase], tuple[MetaDatabase, Learner]]


def grid_search(db: MetaDatabase, grid: GridSpec,
                pipeline_builder: PipelineBuilder) -> tuple[dict, list[tuple[dict, float]]]:
    """LOOCV mean tau for every configuration; first best wins ties.

    ``pipeline_builder(config, db)`` returns the (possibly re-featurised)
    metadatabase and the learner to evaluate for that configuration.
    """
    results: list[tuple[dict, float]] = []
    best_config: dict | None = None
    best_tau = -np.inf
    for config in grid.configurations():
        config_db, learner = pipeline_builder(config, db)
        tau = mean_tau(loocv(config_db, learner))
        results.append((config, tau))
        if tau > best_tau:
            best_tau = tau
            best_config = config
    return best_config, results


def metadb_to_csv(db: MetaDatabase) -> tuple[str, str]:
    """Persist as two aligned CSVs: features and targets."""
    features = io.StringIO()
    features.write("dataset," + ",".join(db.feature_names) + "\n")
    for dataset_id, feats, _ in db.rows:
        features.write(dataset_id + "," +
                       ",".join(format(v, ".17g") for v in feats.values) + "\n")
    targets = io.StringIO()
    algs = db.algorithms
    targets.write("dataset," + ",".join(f"rank_{a}" for a in algs) + "\n")
    for dataset_id, _, target in db.rows:
        ranks = target.ranks()
        targets.write(dataset_id + "," + ",".join(str(ranks[a]) for a in algs) + "\n")
    return features.getvalue(), targets.getvalue()


def metadb_from_csv(features_csv: str, targets_csv: str) -> MetaDatabase:
    f_lines = [ln for ln in features_csv.splitlines() if ln]
    t_lines = [ln for ln in targets_csv.splitlines() if ln]
    names = tuple(f_lines[0].split(",")[1:])
    algs = tuple(c[len("rank_"):] for c in t_lines[0].split(",")[1:])
    targets: dict[str, Ranking] = {}
    for ln in t_lines[1:]:
        dataset_id, *ranks = ln.split(",")
        order = tuple(a for _, a in sorted(zip((int(r) for r in ranks), algs)))
        targets[dataset_id] = Ranking(order=order)
    rows = []
    for ln in f_lines[1:]:
        dataset_id, *values = ln.split(",")
        feats = MetafeatureVector(names=names, values=tuple(float(v) for v in values))
        if dataset_id not in targets:
            raise LengthMismatch(f"dataset {dataset_id!r} missing from targets CSV")
        rows.append((dataset_id, feats, targets[dataset_id]))
    return MetaDatabase(rows=tuple(rows))
