
import numpy as np
import pytest

from recsel.errors import AlgorithmSetMismatch, DegenerateData, DegenerateMatrix, UnsupportedK
from recsel.ingest import HIGHER_BETTER, LOWER_BETTER, PerformanceTable
from recsel.metalearn import Ranking
from recsel.report import (
    ReportData,
    ScoreMatrix,
    baselevel_impact,
    cd_layout,
    emit_report,
    friedman_statistic,
    nemenyi_cd,
    pca_project,
)
from recsel.statfeatures import MetafeatureVector

from oracles import brute_force_cliques


def matrix(values, strategies=None):
    values = np.asarray(values, dtype=np.float64)
    return ScoreMatrix(
        datasets=tuple(f"d{i}" for i in range(values.shape[0])),
        strategies=tuple(strategies or [f"s{j}" for j in range(values.shape[1])]),
        values=values,
    )


def test_friedman_zero_on_identical_columns():
    m = matrix(np.tile([[0.4, 0.4, 0.4]], (6, 1)))
    assert friedman_statistic(m) == pytest.approx(0.0, abs=1e-12)


def test_friedman_two_strategy_closed_form():
    # one strategy wins on every one of 10 datasets: mean ranks are (1, 2)
    values = np.column_stack([np.linspace(0.5, 0.9, 10), np.linspace(0.1, 0.4, 10)])
    m = matrix(values)
    n, k = 10, 2
    oracle = 12.0 * n / (k * (k + 1)) * (1.0 ** 2 + 2.0 ** 2) - 3.0 * n * (k + 1)
    assert friedman_statistic(m) == pytest.approx(oracle, abs=1e-12)


def test_friedman_row_permutation_invariant():
    rng = np.random.default_rng(0)
    values = rng.uniform(-1, 1, size=(7, 4))
    base = friedman_statistic(matrix(values))
    shuffled = values[rng.permutation(7)]
    assert friedman_statistic(matrix(shuffled)) == pytest.approx(base, abs=1e-12)


def test_friedman_monotone_transform_invariant():
    rng = np.random.default_rng(1)
    values = rng.uniform(-0.9, 0.9, size=(5, 3))
    base = friedman_statistic(matrix(values))
    assert friedman_statistic(matrix(np.tanh(2 * values))) == pytest.approx(base)


def test_friedman_degenerate():
    with pytest.raises(DegenerateMatrix):
        friedman_statistic(matrix(np.zeros((1, 3))))
    with pytest.raises(DegenerateMatrix):
        friedman_statistic(matrix(np.zeros((5, 1))))


def test_nemenyi_values():
    assert nemenyi_cd(2, 16, 0.05) == pytest.approx(1.960 / 4.0, abs=1e-12)
    assert nemenyi_cd(3, 10, 0.05) == pytest.approx(1.048, abs=1e-3)
    # strictly decreasing in N
    cds = [nemenyi_cd(4, n, 0.05) for n in (5, 10, 20, 40)]
    assert all(a > b for a, b in zip(cds, cds[1:]))
    assert nemenyi_cd(3, 10, 0.10) < nemenyi_cd(3, 10, 0.05)


def test_nemenyi_unsupported():
    with pytest.raises(UnsupportedK):
        nemenyi_cd(11, 10, 0.05)
    with pytest.raises(UnsupportedK):
        nemenyi_cd(1, 10, 0.05)
    with pytest.raises(UnsupportedK):
        nemenyi_cd(3, 10, 0.01)


def test_cd_layout_one_clique_when_close():
    rng = np.random.default_rng(2)
    noise = rng.uniform(-0.02, 0.02, size=(12, 2))
    m = matrix(0.5 + noise)
    layout = cd_layout(m, 0.05)
    assert layout.cliques == ((layout.mean_ranks[0][0], layout.mean_ranks[1][0]),)


def test_cd_layout_singletons_when_far():
    values = np.tile([[0.9, 0.5, 0.1]], (30, 1))
    layout = cd_layout(matrix(values), 0.05)
    assert layout.cliques == (("s0",), ("s1",), ("s2",))


def test_cd_layout_headline_shape():
    # two good strategies statistically tied, both separated from a baseline
    rng = np.random.default_rng(3)
    a = 0.80 + rng.uniform(-0.05, 0.05, 30)
    b = 0.82 + rng.uniform(-0.05, 0.05, 30)
    c = 0.20 + rng.uniform(-0.05, 0.05, 30)
    m = matrix(np.column_stack([a, b, c]), strategies=("handcrafted", "learned", "baseline"))
    layout = cd_layout(m, 0.05)
    assert set(layout.cliques[0]) == {"handcrafted", "learned"}
    assert ("baseline",) in layout.cliques


@pytest.mark.parametrize("seed", range(10))
def test_cd_layout_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    m = matrix(rng.uniform(-1, 1, size=(int(rng.integers(2, 12)), k)))
    layout = cd_layout(m, 0.05)
    oracle = brute_force_cliques(dict(layout.mean_ranks), layout.cd)
    assert set(layout.cliques) == oracle


def impact_table(scores: dict[str, dict[str, float]], measure="m",
                 direction=HIGHER_BETTER) -> PerformanceTable:
    entries = {(ds, alg, measure): v for ds, per in scores.items()
               for alg, v in per.items()}
    return PerformanceTable(entries=entries, directions={measure: direction})


def test_impact_single_dataset_minmax():
    t = impact_table({"d": {"A": 0.9, "B": 0.5, "C": 0.7}})
    curve = baselevel_impact({"d": Ranking(order=("A", "C", "B"))}, t, "m")
    assert np.allclose(curve, [1.0, 0.5, 0.0])


def test_impact_perfect_ranking_non_increasing():
    rng = np.random.default_rng(4)
    predicted = {}
    scores = {}
    for d in range(6):
        per = {alg: float(rng.uniform(0, 1)) for alg in "ABCD"}
        scores[f"d{d}"] = per
        order = tuple(sorted(per, key=lambda a: -per[a]))
        predicted[f"d{d}"] = Ranking(order=order)
    curve = baselevel_impact(predicted, impact_table(scores), "m")
    assert curve[0] == pytest.approx(1.0)
    assert all(a >= b - 1e-12 for a, b in zip(curve, curve[1:]))
    assert ((0.0 <= curve) & (curve <= 1.0)).all()


def test_impact_single_dataset_is_permutation_of_normalized_scores():
    t = impact_table({"d": {"A": 0.2, "B": 0.8, "C": 0.5}})
    curve = baselevel_impact({"d": Ranking(order=("C", "A", "B"))}, t, "m")
    assert sorted(curve) == pytest.approx([0.0, 0.5, 1.0])


def test_impact_lower_better_inverts():
    t = impact_table({"d": {"A": 0.2, "B": 0.8}}, measure="RMSE", direction=LOWER_BETTER)
    curve = baselevel_impact({"d": Ranking(order=("A", "B"))}, t, "RMSE")
    assert np.allclose(curve, [1.0, 0.0])


def test_impact_algorithm_mismatch():
    t = impact_table({"d": {"A": 0.2, "B": 0.8}})
    with pytest.raises(AlgorithmSetMismatch):
        baselevel_impact({"d": Ranking(order=("A", "X"))}, t, "m")


def vecs(matrix_):
    names = tuple(f"f{j}" for j in range(matrix_.shape[1]))
    return [MetafeatureVector(names=names, values=tuple(row)) for row in matrix_]


def test_pca_line_has_zero_second_component():
    base = np.array([[1.0, 2.0, -1.0]])
    data = np.vstack([base * t for t in (0.0, 1.0, 2.0, 3.0)])
    coords, explained = pca_project(vecs(data))
    assert explained[0] == pytest.approx(1.0, abs=1e-12)
    assert explained[1] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(coords[:, 1], 0.0, atol=1e-9)


def test_pca_explained_fractions_ordered():
    rng = np.random.default_rng(5)
    coords, explained = pca_project(vecs(rng.normal(size=(10, 5))))
    assert explained[0] >= explained[1] >= 0.0
    assert explained[0] <= 1.0
    assert np.allclose(coords.mean(axis=0), 0.0, atol=1e-9)


def test_pca_against_svd_oracle():
    data = np.array([
        [2.0, 0.0, 1.0],
        [0.5, -1.0, 3.0],
        [-1.5, 2.0, 0.0],
        [1.0, 1.0, -2.0],
    ])
    coords, explained = pca_project(vecs(data))
    # oracle: SVD of the standardized matrix instead of an eigensolver
    from recsel.statfeatures import standardize_matrix

    z = standardize_matrix(data)
    _, s, vt = np.linalg.svd(z, full_matrices=False)
    components = vt[:2].T.copy()
    for j in range(2):
        lead = np.argmax(np.abs(components[:, j]))
        if components[lead, j] < 0:
            components[:, j] *= -1
    assert np.allclose(coords, z @ components, atol=1e-9)
    eig = s ** 2 / z.shape[0]
    assert np.allclose(explained, eig[:2] / eig.sum(), atol=1e-9)


def test_pca_reprojection_fixed_point():
    rng = np.random.default_rng(6)
    coords, _ = pca_project(vecs(rng.normal(size=(8, 5))))
    again, _ = pca_project(vecs(coords), standardize=False)
    assert np.allclose(again, coords - coords.mean(axis=0), atol=1e-9)


def test_pca_degenerate_rank0():
    data = np.ones((4, 3))
    with pytest.raises(DegenerateData):
        pca_project(vecs(data))
    with pytest.raises(DegenerateData):
        pca_project(vecs(np.zeros((2, 3))))


def test_emit_report_deterministic(tmp_path):
    data = ReportData(
        configs=[({"theta": t, "knn_k": 1}, 0.1 * i) for i, t in
                 enumerate((25, 50, 100, 200))],
        sweep_params=("theta",),
        scatter=[("cfgA", 0.7, 0.7), ("cfgB", 0.805, 0.858)],
        scatter_best="cfgB",
        score_matrix=matrix(np.array([[0.9, 0.2], [0.8, 0.1], [0.7, 0.3]])),
        impact={"s0": [1.0, 0.4, 0.0], "s1": [0.9, 0.5, 0.1]},
        pca_points=[("a", 0.0, 1.0, 0), ("b", 1.0, -1.0, 1)],
        pca_explained=(0.8, 0.15),
    )
    first = emit_report(data, tmp_path / "one")
    second = emit_report(data, tmp_path / "two")
    assert [p.relative_to(tmp_path / "one") for p in first] == \
        [p.relative_to(tmp_path / "two") for p in second]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()
    theta_rows = (tmp_path / "one" / "sweeps" / "theta.csv").read_text().splitlines()
    assert len(theta_rows) == 1 + 4  # header + one row per theta
    scatter = (tmp_path / "one" / "sweeps" / "scatter.csv").read_text()
    assert "cfgB,0.80500000000000005,0.85799999999999998,1" in scatter
    assert (tmp_path / "one" / "strategies.csv").exists()
    assert (tmp_path / "one" / "cd" / "diagram.svg").exists()
    assert (tmp_path / "one" / "impact" / "curves.csv").exists()
    assert (tmp_path / "one" / "pca" / "map.csv").exists()


def test_score_matrix_validation():
    with pytest.raises(DegenerateMatrix):
        matrix(np.array([[1.5, 0.0]]))
    with pytest.raises(DegenerateMatrix):
        matrix(np.array([[np.nan, 0.0]]))
