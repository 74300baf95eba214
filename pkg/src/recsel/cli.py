"""Command-line pipeline: ingest -> sample -> relabel -> embed -> rank -> report.

Configuration is a flat key-value file (``key = value`` per line, ``#``
comments); any key can be overridden on the command line with
``--set key=value`` and the most common ones have dedicated flags.
Recognised keys and defaults::

    data_dir          directory of <name>.csv rating files (or "datasets",
                      a comma list of file paths)
    performance       path to a dataset,algorithm,measure,value CSV
                      (when absent, commands that need one run the baselevel)
    task              item-recommendation | rating-prediction | both  (both)
    measures          comma list, defaults per task (NDCG,AUC / NMAE,RMSE)
    directions        measure:higher-better|lower-better pairs; the four
                      standard measures are predeclared
    scale_min/max     rating scale (1 / 5)
    theta             random-walk target node count (100)
    restart_prob      walk restart probability (0.15)
    delta             WL refinement depth (6)
    weight_buckets    edge-weight buckets (5)
    smoothing         noise-distribution exponent (0.75)
    sigma             representation size (30)
    epochs/learning_rate/min_learning_rate/negatives   SGNS training
                      (100 / 0.025 / 0.0001 / 5)
    knn_k             neighbors for the label ranker (3)
    folds             baselevel cross-validation folds (10)
    grid_<param>      comma list for grid search (theta, sigma, delta,
                      epochs, learning_rate, negatives, knn_k)
    outdir            output directory (recsel-out)
    seed              global seed (0)

One global seed drives everything: module seeds are derived as the
first 8 bytes of ``blake2b("<seed>:<label>")`` with labels
``walk:<dataset>``, ``train``, ``baselevel``.  Every command writes a
``manifest.txt`` naming the tool version, the resolved configuration and
its hash, so a run is reproducible from the config file alone.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__, baselevel
from .embedding import (
    TrainConfig,
    export_metafeatures,
    metafeatures_from_csv,
    metafeatures_to_csv,
    train,
)
from .errors import ConfigError, DataError, NumericError
from .ingest import (
    HIGHER_BETTER,
    LOWER_BETTER,
    PerformanceTable,
    RatingDataset,
    parse_performance_table,
    parse_ratings,
    serialize_performance_table,
    to_bipartite_graph,
)
from .metalearn import (
    GridSpec,
    MetaDatabase,
    Ranking,
    assemble,
    average_rankings_learner,
    build_metatarget,
    grid_search,
    knn_learner,
    loocv,
    loocv_predictions,
    mean_tau,
    metadb_from_csv,
    metadb_to_csv,
)
from .report import ReportData, ScoreMatrix, baselevel_impact, emit_report, pca_project
from .sampling import WalkConfig, random_walk_sample
from .statfeatures import MetafeatureVector, systematic_metafeatures
from .wl import WlCompressor, build_vocabulary, initial_labels, wl_relabel

TASKS = ("item-recommendation", "rating-prediction")
TASK_MEASURES = {
    "item-recommendation": ("NDCG", "AUC"),
    "rating-prediction": ("NMAE", "RMSE"),
}
STANDARD_DIRECTIONS = {
    "NDCG": HIGHER_BETTER,
    "AUC": HIGHER_BETTER,
    "NMAE": LOWER_BETTER,
    "RMSE": LOWER_BETTER,
}
STRATEGY_EMBED = "embeddings"
STRATEGY_STAT = "statistical"
STRATEGY_AR = "average-rankings"


@dataclass(frozen=True)
class PipelineConfig:
    data_dir: str = ""
    datasets: str = ""
    performance: str = ""
    task: str = "both"
    measures: str = ""
    directions: str = ""
    scale_min: float = 1.0
    scale_max: float = 5.0
    theta: int = 100
    restart_prob: float = 0.15
    delta: int = 6
    weight_buckets: int = 5
    smoothing: float = 0.75
    sigma: int = 30
    epochs: int = 100
    learning_rate: float = 0.025
    min_learning_rate: float = 0.0001
    negatives: int = 5
    knn_k: int = 3
    folds: int = 10
    grid_theta: str = ""
    grid_sigma: str = ""
    grid_delta: str = ""
    grid_epochs: str = ""
    grid_learning_rate: str = ""
    grid_negatives: str = ""
    grid_knn_k: str = ""
    outdir: str = "recsel-out"
    seed: int = 0

    def scale(self) -> tuple[float, float]:
        return (self.scale_min, self.scale_max)

    def tasks(self) -> tuple[str, ...]:
        return TASKS if self.task == "both" else (self.task,)

    def task_measures(self, task: str) -> tuple[str, ...]:
        if self.measures and self.task != "both":
            return tuple(m.strip() for m in self.measures.split(",") if m.strip())
        return TASK_MEASURES[task]

    def direction_map(self) -> dict[str, str]:
        directions = dict(STANDARD_DIRECTIONS)
        for pair in self.directions.split(","):
            if not pair.strip():
                continue
            if ":" not in pair:
                raise ConfigError(f"direction entry {pair!r} is not measure:direction")
            measure, direction = (p.strip() for p in pair.split(":", 1))
            if direction in ("higher", HIGHER_BETTER):
                directions[measure] = HIGHER_BETTER
            elif direction in ("lower", LOWER_BETTER):
                directions[measure] = LOWER_BETTER
            else:
                raise ConfigError(f"unknown direction {direction!r} for {measure!r}")
        return directions

    def grid(self) -> GridSpec:
        def ints(raw: str, default: int) -> tuple:
            return tuple(int(x) for x in raw.split(",") if x.strip()) or (default,)

        def floats(raw: str, default: float) -> tuple:
            return tuple(float(x) for x in raw.split(",") if x.strip()) or (default,)

        return GridSpec(params={
            "theta": ints(self.grid_theta, self.theta),
            "sigma": ints(self.grid_sigma, self.sigma),
            "delta": ints(self.grid_delta, self.delta),
            "epochs": ints(self.grid_epochs, self.epochs),
            "learning_rate": floats(self.grid_learning_rate, self.learning_rate),
            "negatives": ints(self.grid_negatives, self.negatives),
            "knn_k": ints(self.grid_knn_k, self.knn_k),
        })


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def parse_config(text: str, overrides: dict[str, str] | None = None) -> PipelineConfig:
    """Key-value config text plus overrides into a validated PipelineConfig."""
    values: dict[str, str] = {}
    for raw_line in text.splitlines():
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line!r} is not key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value
    values.update(overrides or {})

    kwargs = {}
    for key, raw in values.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        kind = _FIELD_TYPES[key]
        try:
            if kind == "int":
                kwargs[key] = int(raw)
            elif kind == "float":
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw
        except ValueError:
            raise ConfigError(f"config key {key!r}: cannot parse {raw!r} as {kind}") from None
    cfg = PipelineConfig(**kwargs)
    validate_config(cfg)
    return cfg


def validate_config(cfg: PipelineConfig) -> None:
    if cfg.task not in TASKS + ("both",):
        raise ConfigError(f"task must be one of {TASKS + ('both',)}, got {cfg.task!r}")
    if cfg.delta < 0:
        raise ConfigError("delta must be >= 0")
    if cfg.theta < 1:
        raise ConfigError("theta must be >= 1")
    if not (0.0 <= cfg.restart_prob < 1.0):
        raise ConfigError("restart_prob must lie in [0, 1)")
    if cfg.scale_min >= cfg.scale_max:
        raise ConfigError("scale_min must be below scale_max")
    if cfg.data_dir and not Path(cfg.data_dir).is_dir():
        raise ConfigError(f"data_dir {cfg.data_dir!r} does not exist")
    for path in _dataset_paths(cfg, allow_missing=True):
        if not path.is_file():
            raise ConfigError(f"dataset file {path} does not exist")
    if cfg.performance and not Path(cfg.performance).is_file():
        raise ConfigError(f"performance file {cfg.performance!r} does not exist")
    directions = cfg.direction_map()
    for task in cfg.tasks():
        for measure in cfg.task_measures(task):
            if measure not in directions:
                raise ConfigError(f"measure {measure!r} has no declared direction")


def _dataset_paths(cfg: PipelineConfig, allow_missing: bool = False) -> list[Path]:
    paths: list[Path] = []
    if cfg.data_dir:
        paths += sorted(Path(cfg.data_dir).glob("*.csv"))
    if cfg.datasets:
        paths += [Path(p.strip()) for p in cfg.datasets.split(",") if p.strip()]
    if not paths and not allow_missing:
        raise ConfigError("no datasets configured (set data_dir or datasets)")
    return paths


def load_datasets(cfg: PipelineConfig) -> list[RatingDataset]:
    out = []
    for path in _dataset_paths(cfg):
        with open(path, encoding="utf-8") as handle:
            out.append(parse_ratings(handle, scale=cfg.scale(), name=path.stem))
    return out


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{seed}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def config_hash(cfg: PipelineConfig) -> str:
    text = "\n".join(f"{f.name}={getattr(cfg, f.name)}" for f in fields(PipelineConfig))
    return hashlib.sha256(text.encode()).hexdigest()


def write_manifest(cfg: PipelineConfig, command: str, outdir: Path) -> None:
    lines = [f"tool recsel {__version__}",
             f"command {command}",
             f"config_hash {config_hash(cfg)}"]
    lines += [f"{f.name} {getattr(cfg, f.name)}" for f in fields(PipelineConfig)]
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# pipeline stages


def compute_embeddings(datasets: list[RatingDataset], cfg: PipelineConfig,
                       theta: int | None = None, delta: int | None = None,
                       sigma: int | None = None, epochs: int | None = None,
                       learning_rate: float | None = None,
                       negatives: int | None = None) -> dict[str, np.ndarray]:
    """Graphs -> sampled subgraphs -> WL documents -> trained representations."""
    theta = cfg.theta if theta is None else theta
    delta = cfg.delta if delta is None else delta
    compressor = WlCompressor()
    docs = []
    for d in datasets:
        graph = to_bipartite_graph(d)
        walk = WalkConfig(theta=theta, restart_probability=cfg.restart_prob,
                          seed=derive_seed(cfg.seed, f"walk:{d.name}"))
        sampled = random_walk_sample(graph, walk)
        labels = initial_labels(sampled, cfg.weight_buckets)
        docs.append(wl_relabel(sampled, labels, delta, cfg.weight_buckets,
                               compressor, graph_id=d.name))
    vocab = build_vocabulary(docs, cfg.smoothing)
    train_cfg = TrainConfig(
        sigma=cfg.sigma if sigma is None else sigma,
        epochs=cfg.epochs if epochs is None else epochs,
        learning_rate=cfg.learning_rate if learning_rate is None else learning_rate,
        negatives=cfg.negatives if negatives is None else negatives,
        seed=derive_seed(cfg.seed, "train"),
        min_learning_rate=cfg.min_learning_rate,
    )
    model = train(docs, vocab, train_cfg)
    return export_metafeatures(model, [d.name for d in datasets])


def _embedding_vectors(table: dict[str, np.ndarray]) -> dict[str, MetafeatureVector]:
    sigma = len(next(iter(table.values())))
    names = tuple(f"e{j + 1}" for j in range(sigma))
    return {ds: MetafeatureVector(names=names, values=tuple(float(v) for v in vec))
            for ds, vec in table.items()}


def load_or_run_performance(cfg: PipelineConfig, datasets: list[RatingDataset],
                            outdir: Path) -> PerformanceTable:
    directions = cfg.direction_map()
    if cfg.performance:
        with open(cfg.performance, encoding="utf-8") as handle:
            return parse_performance_table(handle, directions)
    rows = baselevel.performance_rows(datasets, folds=cfg.folds,
                                      seed=derive_seed(cfg.seed, "baselevel"))
    table = PerformanceTable(
        entries={(ds, alg, ms): val for ds, alg, ms, val in rows},
        directions=directions)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "performance.csv").write_text(serialize_performance_table(table),
                                            encoding="utf-8")
    return table


def _metadb(vectors: dict[str, MetafeatureVector], targets: dict[str, Ranking],
            ids: list[str]) -> MetaDatabase:
    return assemble([vectors[i] for i in ids], [targets[i] for i in ids], ids)


# ---------------------------------------------------------------------------
# commands


def cmd_ingest_check(cfg: PipelineConfig) -> int:
    datasets = load_datasets(cfg)
    for d in datasets:
        density = d.n_ratings / (len(d.users) * len(d.items))
        print(f"{d.name}: users={len(d.users)} items={len(d.items)} "
              f"ratings={d.n_ratings} density={density:.4f} scale={d.scale}")
    if cfg.performance:
        with open(cfg.performance, encoding="utf-8") as handle:
            table = parse_performance_table(handle, cfg.direction_map())
        print(f"performance: datasets={len(table.datasets())} entries={len(table.entries)}")
    print("ok")
    return 0


def cmd_baselevel(cfg: PipelineConfig) -> int:
    datasets = load_datasets(cfg)
    outdir = Path(cfg.outdir)
    rows = baselevel.performance_rows(datasets, folds=cfg.folds,
                                      seed=derive_seed(cfg.seed, "baselevel"))
    table = PerformanceTable(
        entries={(ds, alg, ms): val for ds, alg, ms, val in rows},
        directions=cfg.direction_map())
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "performance.csv").write_text(serialize_performance_table(table),
                                            encoding="utf-8")
    write_manifest(cfg, "baselevel", outdir)
    print(f"wrote {outdir / 'performance.csv'}")
    return 0


def cmd_embed(cfg: PipelineConfig) -> int:
    datasets = load_datasets(cfg)
    table = compute_embeddings(datasets, cfg)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "embeddings.csv").write_text(metafeatures_to_csv(table), encoding="utf-8")
    write_manifest(cfg, "embed", outdir)
    print(f"wrote {outdir / 'embeddings.csv'} ({len(table)} rows, sigma={cfg.sigma})")
    return 0


def cmd_statfeatures(cfg: PipelineConfig) -> int:
    datasets = load_datasets(cfg)
    vectors = {d.name: systematic_metafeatures(d) for d in datasets}
    first = next(iter(vectors.values()))
    lines = ["dataset," + ",".join(first.names)]
    for name, vec in vectors.items():
        lines.append(name + "," + ",".join(format(v, ".17g") for v in vec.values))
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "statistical.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(cfg, "statfeatures", outdir)
    print(f"wrote {outdir / 'statistical.csv'} ({len(vectors)} rows)")
    return 0


def _features_from_csv(path: Path) -> dict[str, MetafeatureVector]:
    text = path.read_text(encoding="utf-8")
    header = text.splitlines()[0].split(",")[1:]
    table = metafeatures_from_csv(text)
    return {ds: MetafeatureVector(names=tuple(header), values=tuple(float(v) for v in vec))
            for ds, vec in table.items()}


def cmd_train(cfg: PipelineConfig, features_path: str = "", task: str = "") -> int:
    outdir = Path(cfg.outdir)
    task = task or (cfg.task if cfg.task != "both" else TASKS[0])
    features_file = Path(features_path) if features_path else outdir / "embeddings.csv"
    if not features_file.is_file():
        raise ConfigError(f"features file {features_file} does not exist "
                          "(run the embed or statfeatures command first)")
    vectors = _features_from_csv(features_file)
    datasets = load_datasets(cfg)
    table = load_or_run_performance(cfg, datasets, outdir)
    measures = cfg.task_measures(task)
    ids = [d.name for d in datasets]
    missing = [i for i in ids if i not in vectors]
    if missing:
        raise DataError(f"features file lacks rows for {missing[:3]}")
    targets = {i: build_metatarget(table, i, measures) for i in ids}
    db = _metadb(vectors, targets, ids)
    features_csv, targets_csv = metadb_to_csv(db)
    (outdir / "metadb_features.csv").write_text(features_csv, encoding="utf-8")
    (outdir / "metadb_targets.csv").write_text(targets_csv, encoding="utf-8")
    write_manifest(cfg, "train", outdir)
    print(f"metadatabase: {len(db)} rows, algorithms={','.join(db.algorithms)}")
    return 0


def cmd_select(cfg: PipelineConfig, query: str, learner_name: str = "knn") -> int:
    outdir = Path(cfg.outdir)
    features_file = outdir / "metadb_features.csv"
    targets_file = outdir / "metadb_targets.csv"
    if not features_file.is_file() or not targets_file.is_file():
        raise ConfigError("metadatabase not found; run the train command first")
    db = metadb_from_csv(features_file.read_text(encoding="utf-8"),
                         targets_file.read_text(encoding="utf-8"))
    row = {dataset_id: feats for dataset_id, feats, _ in db.rows}.get(query)
    if row is None:
        raise DataError(f"query dataset {query!r} not in the metadatabase")
    if learner_name == "ar":
        predicted = average_rankings_learner()(db, row)
    else:
        predicted = knn_learner(cfg.knn_k)(db, row)
    for rank, algorithm in enumerate(predicted.order, start=1):
        print(f"{rank},{algorithm}")
    return 0


def _experiment_task(cfg: PipelineConfig, task: str, ids: list[str],
                     table: PerformanceTable,
                     stat_vectors: dict[str, MetafeatureVector],
                     embed_cache: dict[tuple, dict[str, MetafeatureVector]],
                     datasets: list[RatingDataset], outdir: Path) -> dict:
    """Grid-search embeddings, statistical features and AR on one task."""
    measures = cfg.task_measures(task)
    targets = {i: build_metatarget(table, i, measures) for i in ids}
    embed_params = ("theta", "sigma", "delta", "epochs", "learning_rate", "negatives")

    def embed_pipeline(config: dict, _base: MetaDatabase):
        key = tuple(config[p] for p in embed_params)
        if key not in embed_cache:
            embed_cache[key] = _embedding_vectors(compute_embeddings(
                datasets, cfg, theta=config["theta"], delta=config["delta"],
                sigma=config["sigma"], epochs=config["epochs"],
                learning_rate=config["learning_rate"], negatives=config["negatives"]))
        return _metadb(embed_cache[key], targets, ids), knn_learner(config["knn_k"])

    stat_db = _metadb(stat_vectors, targets, ids)
    best_config, configs = grid_search(stat_db, cfg.grid(), embed_pipeline)
    best_db, best_learner = embed_pipeline(best_config, stat_db)
    best_scores = loocv(best_db, best_learner)

    stat_best = None
    for k in cfg.grid().params["knn_k"]:
        scores = loocv(stat_db, knn_learner(k))
        tau = mean_tau(scores)
        if stat_best is None or tau > stat_best[1]:
            stat_best = (k, tau, scores)
    ar_scores = loocv(stat_db, average_rankings_learner())

    strategies = (STRATEGY_EMBED, STRATEGY_STAT, STRATEGY_AR)
    per_strategy = {STRATEGY_EMBED: dict(best_scores),
                    STRATEGY_STAT: dict(stat_best[2]),
                    STRATEGY_AR: dict(ar_scores)}
    matrix = ScoreMatrix(
        datasets=tuple(ids), strategies=strategies,
        values=np.array([[per_strategy[s][i] for s in strategies] for i in ids]))

    impact = {}
    impact_learners = {
        STRATEGY_EMBED: (best_db, knn_learner(best_config["knn_k"])),
        STRATEGY_STAT: (stat_db, knn_learner(stat_best[0])),
        STRATEGY_AR: (stat_db, average_rankings_learner()),
    }
    for name, (db, learner) in impact_learners.items():
        predictions = dict(loocv_predictions(db, learner))
        impact[name] = baselevel_impact(predictions, table, measures)

    best_features = [embed_cache[tuple(best_config[p] for p in embed_params)][i]
                     for i in ids]
    coords, explained = pca_project(best_features)
    class_of: dict[tuple, int] = {}
    pca_points = []
    for i, dataset_id in enumerate(ids):
        order = targets[dataset_id].order
        cls = class_of.setdefault(order, len(class_of))
        pca_points.append((dataset_id, float(coords[i, 0]), float(coords[i, 1]), cls))

    data = ReportData(
        configs=configs,
        scatter=None,
        score_matrix=matrix,
        impact=impact,
        pca_points=pca_points,
        pca_explained=(float(explained[0]), float(explained[1])),
    )
    emit_report(data, outdir)

    features_csv, targets_csv = metadb_to_csv(best_db)
    (outdir / "metadb_features.csv").write_text(features_csv, encoding="utf-8")
    (outdir / "metadb_targets.csv").write_text(targets_csv, encoding="utf-8")
    lines = ["dataset," + ",".join(strategies)]
    for i in ids:
        lines.append(i + "," + ",".join(format(per_strategy[s][i], ".17g")
                                        for s in strategies))
    (outdir / "scores_matrix.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return {"configs": configs, "best_config": best_config}


def cmd_experiment(cfg: PipelineConfig) -> int:
    datasets = load_datasets(cfg)
    ids = [d.name for d in datasets]
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    table = load_or_run_performance(cfg, datasets, outdir)
    stat_vectors = {d.name: systematic_metafeatures(d) for d in datasets}
    embed_cache: dict[tuple, dict[str, MetafeatureVector]] = {}

    task_results = {}
    for task in cfg.tasks():
        task_dir = outdir / task if len(cfg.tasks()) > 1 else outdir
        task_results[task] = _experiment_task(cfg, task, ids, table, stat_vectors,
                                              embed_cache, datasets, task_dir)

    if len(task_results) == 2:
        first, second = (task_results[t]["configs"] for t in cfg.tasks())
        points = []
        for (config, tau1), (_, tau2) in zip(first, second):
            label = "-".join(f"{k[0]}{v}" for k, v in sorted(config.items()))
            points.append((label, tau1, tau2))
        best_label = max(points, key=lambda p: (p[1] + p[2], p[0]))[0]
        emit_report(ReportData(scatter=points, scatter_best=best_label), outdir)

    write_manifest(cfg, "experiment", outdir)
    for task in cfg.tasks():
        best = task_results[task]["best_config"]
        print(f"{task}: best config {best}")
    print(f"report written to {outdir}")
    return 0


def cmd_report(cfg: PipelineConfig, scores: str = "", scatter_scores: str = "") -> int:
    if not scores and not scatter_scores:
        raise ConfigError("report needs --scores and/or --scatter-scores")
    for path in (scores, scatter_scores):
        if path and not Path(path).is_file():
            raise ConfigError(f"score file {path!r} does not exist")
    outdir = Path(cfg.outdir)
    data = ReportData()
    if scores:
        lines = [ln for ln in Path(scores).read_text(encoding="utf-8").splitlines() if ln]
        strategies = tuple(lines[0].split(",")[1:])
        ids, rows = [], []
        for ln in lines[1:]:
            dataset_id, *values = ln.split(",")
            ids.append(dataset_id)
            rows.append([float(v) for v in values])
        data.score_matrix = ScoreMatrix(datasets=tuple(ids), strategies=strategies,
                                        values=np.array(rows))
    if scatter_scores:
        lines = [ln for ln in Path(scatter_scores).read_text(encoding="utf-8").splitlines()
                 if ln]
        points = []
        for ln in lines[1:]:
            label, x, y = ln.split(",")[:3]
            points.append((label, float(x), float(y)))
        data.scatter = points
        data.scatter_best = max(points, key=lambda p: (p[1] + p[2], p[0]))[0]
    emit_report(data, outdir)
    write_manifest(cfg, "report", outdir)
    print(f"report written to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="path to a key=value config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key")
    parser.add_argument("--data-dir", help="directory of rating CSVs")
    parser.add_argument("--outdir", help="output directory")
    parser.add_argument("--seed", type=int, help="global seed")
    parser.add_argument("--theta", type=int, help="walk target node count")
    parser.add_argument("--restart-prob", type=float, help="walk restart probability")
    parser.add_argument("--delta", type=int, help="WL refinement depth")
    parser.add_argument("--sigma", type=int, help="representation size")
    parser.add_argument("--epochs", type=int, help="training epochs")
    parser.add_argument("--knn-k", type=int, help="label-ranker neighbors")
    parser.add_argument("--folds", type=int, help="baselevel CV folds")
    parser.add_argument("--task", help="item-recommendation | rating-prediction | both")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    text = ""
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file {args.config!r} does not exist")
        text = path.read_text(encoding="utf-8")
    overrides: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for flag in ("data_dir", "outdir", "seed", "theta", "restart_prob", "delta",
                 "sigma", "epochs", "knn_k", "folds", "task"):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[flag] = str(value)
    return parse_config(text, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="recsel",
        description="Select recommender algorithms from learned graph representations.")
    parser.add_argument("--version", action="version", version=f"recsel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("ingest-check", "validate rating and performance files"),
        ("baselevel", "run the CF learners and write the performance table"),
        ("embed", "learn graph representations and export them as metafeatures"),
        ("statfeatures", "compute the statistical metafeature vectors"),
        ("train", "assemble the metadatabase (features + target rankings)"),
        ("select", "predict the algorithm ranking for one dataset"),
        ("experiment", "grid search + LOOCV for all strategies, full report"),
        ("report", "re-emit report artifacts from stored score files"),
    ):
        p = sub.add_parser(name, help=text)
        _add_common(p)
        if name == "train":
            p.add_argument("--features", default="",
                           help="metafeature CSV (default: <outdir>/embeddings.csv)")
        if name == "select":
            p.add_argument("--query", required=True, help="dataset id to rank for")
            p.add_argument("--learner", choices=("knn", "ar"), default="knn")
        if name == "report":
            p.add_argument("--scores", default="",
                           help="dataset-by-strategy tau CSV for the CD analysis")
            p.add_argument("--scatter-scores", default="",
                           help="config,x,y CSV for the two-task scatter")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "ingest-check":
            return cmd_ingest_check(cfg)
        if args.command == "baselevel":
            return cmd_baselevel(cfg)
        if args.command == "embed":
            return cmd_embed(cfg)
        if args.command == "statfeatures":
            return cmd_statfeatures(cfg)
        if args.command == "train":
            return cmd_train(cfg, features_path=args.features)
        if args.command == "select":
            return cmd_select(cfg, query=args.query, learner_name=args.learner)
        if args.command == "experiment":
            return cmd_experiment(cfg)
        if args.command == "report":
            return cmd_report(cfg, scores=args.scores, scatter_scores=args.scatter_scores)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
