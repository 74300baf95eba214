"""Experiment analyses: Friedman/Nemenyi comparison, baselevel-impact
curves, PCA maps and the report file tree.

Output layout under the report directory (all CSVs byte-deterministic;
SVGs are minimal static renderings, the CSVs are the source of truth):

    sweeps/<param>.csv      per-grid-value mean/best tau
    sweeps/configs.csv      every evaluated configuration
    sweeps/scatter.csv/.svg two-task performance per configuration
    cd/layout.csv           strategy mean ranks, statistic and CD
    cd/cliques.csv          groups not separated at the chosen alpha
    cd/diagram.svg
    impact/curves.csv/.svg  mean normalized performance by rank threshold
    pca/map.csv/.svg        2-D projection with metatarget classes
    strategies.csv          per-strategy LOOCV mean tau
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .errors import AlgorithmSetMismatch, DegenerateData, DegenerateMatrix, UnsupportedK
from .ingest import LOWER_BETTER, PerformanceTable
from .metalearn import Ranking
from .statfeatures import MetafeatureVector, standardize_matrix

# Two-tailed Nemenyi critical values (studentized range / sqrt 2,
# infinite degrees of freedom) for k = 2..10 strategies.
_Q_ALPHA = {
    0.05: (1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164),
    0.10: (1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920),
}


@dataclass(frozen=True)
class ScoreMatrix:
    """Tau scores: one row per dataset, one column per strategy."""

    datasets: tuple[str, ...]
    strategies: tuple[str, ...]
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (len(self.datasets), len(self.strategies)):
            raise DegenerateMatrix("score matrix shape disagrees with labels")
        if not np.isfinite(v).all():
            raise DegenerateMatrix("score matrix contains non-finite values")
        if (v < -1.0).any() or (v > 1.0).any():
            raise DegenerateMatrix("tau scores must lie in [-1, 1]")


def _mean_ranks(m: ScoreMatrix) -> np.ndarray:
    # rank 1 = best (highest score), fractional ranks on ties
    return np.vstack([rankdata(-row, method="average") for row in m.values]).mean(axis=0)


def friedman_statistic(m: ScoreMatrix) -> float:
    """Friedman chi-square over per-dataset strategy ranks."""
    n, k = m.values.shape
    if n < 2 or k < 2:
        raise DegenerateMatrix("need at least 2 datasets and 2 strategies")
    mean_ranks = _mean_ranks(m)
    return float(12.0 * n / (k * (k + 1)) * (mean_ranks ** 2).sum() - 3.0 * n * (k + 1))


def nemenyi_cd(k: int, n: int, alpha: float = 0.05) -> float:
    """Critical difference q_alpha(k) * sqrt(k(k+1) / (6N))."""
    if alpha not in _Q_ALPHA:
        raise UnsupportedK(f"alpha must be one of {sorted(_Q_ALPHA)}")
    if not 2 <= k <= 10:
        raise UnsupportedK(f"critical values embedded for 2 <= k <= 10, got {k}")
    if n < 1:
        raise UnsupportedK("need at least one dataset")
    return _Q_ALPHA[alpha][k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))


@dataclass(frozen=True)
class CDLayout:
    mean_ranks: tuple[tuple[str, float], ...]  # sorted, best first
    statistic: float
    cd: float
    cliques: tuple[tuple[str, ...], ...]


def cd_layout(m: ScoreMatrix, alpha: float = 0.05) -> CDLayout:
    """Mean ranks plus maximal groups whose internal rank gaps stay within CD."""
    statistic = friedman_statistic(m)
    cd = nemenyi_cd(len(m.strategies), len(m.datasets), alpha)
    ranks = _mean_ranks(m)
    ordered = sorted(zip(m.strategies, ranks), key=lambda t: (t[1], t[0]))
    cliques: list[tuple[str, ...]] = []
    for i in range(len(ordered)):
        j = i
        while j + 1 < len(ordered) and ordered[j + 1][1] - ordered[i][1] <= cd:
            j += 1
        group = tuple(name for name, _ in ordered[i:j + 1])
        if not any(set(group) <= set(existing) for existing in cliques):
            cliques.append(group)
    return CDLayout(mean_ranks=tuple(ordered), statistic=statistic, cd=cd,
                    cliques=tuple(cliques))


def _normalized_scores(t: PerformanceTable, dataset: str, algorithms: Sequence[str],
                       measure_aggregate: str | Sequence[str]) -> dict[str, float]:
    """Direction-aware min-max normalization of one dataset's scores.

    ``measure_aggregate`` is a measure name, a sequence of measure names
    whose normalized values are averaged (then rescaled so the best
    algorithm is 1), or ``"mean"`` for all measures of the dataset.
    """
    def minmax(measure: str) -> np.ndarray:
        raw = np.array([t.score(dataset, a, measure) for a in algorithms])
        lo, hi = raw.min(), raw.max()
        if hi == lo:
            return np.ones(len(raw))
        norm = (raw - lo) / (hi - lo)
        return 1.0 - norm if t.directions[measure] == LOWER_BETTER else norm

    if measure_aggregate == "mean":
        measure_aggregate = sorted({ms for (ds, _, ms) in t.entries if ds == dataset})
    if not isinstance(measure_aggregate, str):
        stacked = np.vstack([minmax(ms) for ms in measure_aggregate]).mean(axis=0)
        lo, hi = stacked.min(), stacked.max()
        values = np.ones(len(algorithms)) if hi == lo else (stacked - lo) / (hi - lo)
    else:
        values = minmax(measure_aggregate)
    return dict(zip(algorithms, values))


def baselevel_impact(predicted: Mapping[str, Ranking], t: PerformanceTable,
                     measure_aggregate: str | Sequence[str] = "mean") -> np.ndarray:
    """Mean normalized baselevel performance at each rank threshold.

    Position ``l`` of the curve answers: had we deployed the algorithm
    predicted at rank ``l``, what fraction of the dataset's best
    attainable performance would we have kept, averaged over datasets?
    """
    if not predicted:
        raise AlgorithmSetMismatch("no predicted rankings supplied")
    sizes = {len(r.order) for r in predicted.values()}
    if len(sizes) != 1:
        raise AlgorithmSetMismatch("predicted rankings differ in length")
    n_algorithms = sizes.pop()
    curve = np.zeros(n_algorithms)
    for dataset, ranking in predicted.items():
        table_algs = set(t.algorithms(dataset))
        if table_algs != set(ranking.order):
            raise AlgorithmSetMismatch(
                f"dataset {dataset!r}: ranking covers {sorted(ranking.order)}, "
                f"table covers {sorted(table_algs)}")
        norm = _normalized_scores(t, dataset, ranking.order, measure_aggregate)
        curve += np.array([norm[alg] for alg in ranking.order])
    return curve / len(predicted)


def pca_project(features: Sequence[MetafeatureVector], dims: int = 2,
                standardize: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Project standardized metafeatures onto the top principal components.

    Returns (coordinates, explained-variance fractions).  Components are
    ordered by eigenvalue; each is sign-fixed so its largest-magnitude
    loading is positive.  ``standardize=False`` only mean-centers, which
    makes re-projection of projected points an exact no-op; the default
    rescales every column to unit variance first, which heterogeneous
    metafeature scales need.
    """
    if len(features) < 3:
        raise DegenerateData("PCA map needs at least 3 vectors")
    names = features[0].names
    for f in features[1:]:
        if f.names != names:
            raise DegenerateData("feature vectors disagree on names")
    matrix = np.vstack([f.as_array() for f in features])
    z = standardize_matrix(matrix) if standardize else matrix - matrix.mean(axis=0)
    cov = z.T @ z / z.shape[0]
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    eigenvalues = np.clip(eigenvalues[::-1], 0.0, None)
    eigenvectors = eigenvectors[:, ::-1]
    total = eigenvalues.sum()
    if total <= 0.0:
        raise DegenerateData("all feature columns are constant (rank 0)")
    components = eigenvectors[:, :dims].copy()
    for j in range(components.shape[1]):
        lead = np.argmax(np.abs(components[:, j]))
        if components[lead, j] < 0:
            components[:, j] = -components[:, j]
    return z @ components, eigenvalues[:dims] / total


# ---------------------------------------------------------------------------
# file emission


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8")


def _svg_document(width: int, height: int, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">')
    frame = f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>'
    return "\n".join([head, frame] + body + ["</svg>"]) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
            "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _scale(values: Sequence[float], lo_px: float, hi_px: float) -> list[float]:
    lo, hi = min(values), max(values)
    span = hi - lo if hi > lo else 1.0
    return [lo_px + (v - lo) / span * (hi_px - lo_px) for v in values]


def svg_scatter(points: Sequence[tuple[str, float, float]], best: str | None = None,
                width: int = 480, height: int = 360) -> str:
    xs = _scale([p[1] for p in points], 40, width - 20)
    ys = _scale([p[2] for p in points], height - 30, 20)
    body = []
    for (label, _, _), x, y in zip(points, xs, ys):
        mark = label == best
        body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{6 if mark else 3}" '
                    f'fill="{"#d62728" if mark else "#1f77b4"}"/>')
        if mark:
            body.append(f'<text x="{x + 8:.2f}" y="{y:.2f}" font-size="11">{label}</text>')
    return _svg_document(width, height, body)


def svg_lines(series: Mapping[str, Sequence[float]], width: int = 480,
              height: int = 360) -> str:
    body = []
    all_values = [v for vs in series.values() for v in vs]
    lo, hi = min(all_values), max(all_values)
    span = hi - lo if hi > lo else 1.0
    for row, (color, (name, vs)) in enumerate(zip(_PALETTE, sorted(series.items()))):
        pts = []
        for i, v in enumerate(vs):
            x = 40 + i * (width - 60) / max(1, len(vs) - 1)
            y = height - 30 - (v - lo) / span * (height - 50)
            pts.append(f"{x:.2f},{y:.2f}")
        body.append(f'<polyline points="{" ".join(pts)}" fill="none" '
                    f'stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{width - 150}" y="{20 + 14 * row}" '
                    f'font-size="11" fill="{color}">{name}</text>')
    return _svg_document(width, height, body)


def svg_cd_diagram(layout: CDLayout, width: int = 480) -> str:
    k = len(layout.mean_ranks)
    axis_lo, axis_hi = 1.0, float(k)
    span = axis_hi - axis_lo if axis_hi > axis_lo else 1.0

    def x_of(rank: float) -> float:
        return 40 + (rank - axis_lo) / span * (width - 80)

    body = [f'<line x1="40" y1="40" x2="{width - 40}" y2="40" stroke="black"/>']
    for name, rank in layout.mean_ranks:
        x = x_of(rank)
        body.append(f'<line x1="{x:.2f}" y1="34" x2="{x:.2f}" y2="46" stroke="black"/>')
        body.append(f'<text x="{x:.2f}" y="30" font-size="10" text-anchor="middle">'
                    f'{name} ({rank:.3g})</text>')
    y = 56
    for clique in layout.cliques:
        if len(clique) < 2:
            continue
        ranks = dict(layout.mean_ranks)
        lo = min(ranks[c] for c in clique)
        hi = max(ranks[c] for c in clique)
        body.append(f'<line x1="{x_of(lo):.2f}" y1="{y}" x2="{x_of(hi):.2f}" y2="{y}" '
                    f'stroke="black" stroke-width="4"/>')
        y += 10
    body.append(f'<text x="40" y="{y + 18}" font-size="10">CD = {layout.cd:.4g}</text>')
    return _svg_document(width, y + 30, body)


@dataclass
class ReportData:
    """Everything :func:`emit_report` can render; unset parts are skipped."""

    configs: list[tuple[dict, float]] | None = None
    sweep_params: tuple[str, ...] = ("theta", "sigma", "delta")
    scatter: list[tuple[str, float, float]] | None = None
    scatter_best: str | None = None
    score_matrix: ScoreMatrix | None = None
    alpha: float = 0.05
    impact: Mapping[str, Sequence[float]] | None = None
    pca_points: list[tuple[str, float, float, int]] | None = None
    pca_explained: tuple[float, float] | None = None


def emit_report(data: ReportData, outdir: str | Path) -> list[Path]:
    """Write the deterministic report tree; returns the files written."""
    out = Path(outdir)
    written: list[Path] = []

    def emit(rel: str, content: str) -> None:
        path = out / rel
        _write(path, content)
        written.append(path)

    if data.configs is not None:
        keys = sorted({k for cfg, _ in data.configs for k in cfg})
        lines = [",".join(keys + ["mean_tau"])]
        for cfg, tau in data.configs:
            lines.append(",".join([str(cfg.get(k, "")) for k in keys] + [_fmt(tau)]))
        emit("sweeps/configs.csv", "\n".join(lines) + "\n")
        for param in data.sweep_params:
            values = sorted({cfg[param] for cfg, _ in data.configs if param in cfg})
            if not values:
                continue
            lines = [f"{param},mean_tau,best_tau"]
            for v in values:
                taus = [tau for cfg, tau in data.configs if cfg.get(param) == v]
                lines.append(f"{v},{_fmt(np.mean(taus))},{_fmt(max(taus))}")
            emit(f"sweeps/{param}.csv", "\n".join(lines) + "\n")

    if data.scatter is not None:
        lines = ["config,task1_tau,task2_tau,best"]
        for label, x, y in data.scatter:
            lines.append(f"{label},{_fmt(x)},{_fmt(y)},{int(label == data.scatter_best)}")
        emit("sweeps/scatter.csv", "\n".join(lines) + "\n")
        emit("sweeps/scatter.svg", svg_scatter(data.scatter, data.scatter_best))

    if data.score_matrix is not None:
        layout = cd_layout(data.score_matrix, data.alpha)
        lines = ["strategy,mean_rank"]
        for name, rank in layout.mean_ranks:
            lines.append(f"{name},{_fmt(rank)}")
        lines.append(f"#friedman_statistic,{_fmt(layout.statistic)}")
        lines.append(f"#critical_difference,{_fmt(layout.cd)}")
        emit("cd/layout.csv", "\n".join(lines) + "\n")
        clique_lines = ["clique"] + [" ".join(c) for c in layout.cliques]
        emit("cd/cliques.csv", "\n".join(clique_lines) + "\n")
        emit("cd/diagram.svg", svg_cd_diagram(layout))

        m = data.score_matrix
        lines = ["strategy,mean_tau"]
        for j, name in enumerate(m.strategies):
            lines.append(f"{name},{_fmt(m.values[:, j].mean())}")
        emit("strategies.csv", "\n".join(lines) + "\n")

    if data.impact is not None:
        lines = ["strategy,position,value"]
        for name in sorted(data.impact):
            for pos, value in enumerate(data.impact[name], start=1):
                lines.append(f"{name},{pos},{_fmt(value)}")
        emit("impact/curves.csv", "\n".join(lines) + "\n")
        emit("impact/curves.svg", svg_lines({n: list(v) for n, v in data.impact.items()}))

    if data.pca_points is not None:
        lines = ["dataset,pc1,pc2,target_class"]
        for name, x, y, cls in data.pca_points:
            lines.append(f"{name},{_fmt(x)},{_fmt(y)},{cls}")
        emit("pca/map.csv", "\n".join(lines) + "\n")
        body = []
        xs = _scale([p[1] for p in data.pca_points], 40, 440)
        ys = _scale([p[2] for p in data.pca_points], 330, 20)
        for (name, _, _, cls), x, y in zip(data.pca_points, xs, ys):
            color = _PALETTE[cls % len(_PALETTE)]
            body.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="4" fill="{color}"/>')
            body.append(f'<text x="{x + 6:.2f}" y="{y:.2f}" font-size="9">{name}</text>')
        if data.pca_explained is not None:
            body.append(f'<text x="40" y="352" font-size="10">explained: '
                        f'{data.pca_explained[0]:.3f}, {data.pca_explained[1]:.3f}</text>')
        emit("pca/map.svg", _svg_document(480, 360, body))

    return written
