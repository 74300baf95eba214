import numpy as np
import pytest

from recsel import kernels
from recsel.embedding import (
    EmbeddingModel,
    TrainConfig,
    draw_negatives,
    export_metafeatures,
    init_model,
    load_model,
    metafeatures_from_csv,
    metafeatures_to_csv,
    save_model,
    sgns_gradients,
    sgns_loss,
    train,
)
from recsel.errors import ShapeMismatch, UnknownToken
from recsel.wl import SubgraphDocument, build_vocabulary


def make_docs(specs):
    return [SubgraphDocument(graph_id=name, tokens_by_iteration=(tuple(tokens),))
            for name, tokens in specs]


@pytest.fixture
def toy_corpus():
    docs = make_docs([
        ("g0", ["a", "b", "c", "a"]),
        ("g1", ["a", "b", "c", "b"]),
        ("g2", ["d", "e", "f", "d"]),
        ("g3", ["a", "c", "c", "b"]),
        ("g4", ["d", "f", "e", "e"]),
    ])
    return docs, build_vocabulary(docs)


def test_default_sigma_is_30():
    assert TrainConfig().sigma == 30


def test_init_model_deterministic_and_bounded(toy_corpus):
    _, vocab = toy_corpus
    cfg = TrainConfig(sigma=12, seed=9)
    a = init_model(4, vocab, cfg)
    b = init_model(4, vocab, cfg)
    assert np.array_equal(a.E, b.E)
    assert np.abs(a.E).max() <= 0.5 / 12
    assert not a.C.any()
    assert a.C.shape == (len(vocab), 12)


def test_sgns_loss_zero_vectors():
    z = np.zeros(4)
    assert sgns_loss(z, z, [z] * 5) == pytest.approx(6 * np.log(2), rel=1e-12)


def test_sgns_loss_limit():
    v = np.array([40.0, 0.0])
    assert sgns_loss(v, v, []) == pytest.approx(0.0, abs=1e-12)


def test_sgns_loss_scalar_oracle():
    # frozen from a 50-digit evaluation of -ln s(2) - ln s(1)
    v = np.array([1.0, 0.0])
    c_pos = np.array([2.0, 0.0])
    c_neg = np.array([-1.0, 0.0])
    assert sgns_loss(v, c_pos, [c_neg]) == pytest.approx(
        0.44018969856119533049272230132616, rel=1e-14)


@pytest.mark.parametrize("seed", range(10))
def test_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    sigma = int(rng.integers(2, 8))
    k = int(rng.integers(1, 4))
    v = rng.normal(size=sigma)
    c_pos = rng.normal(size=sigma)
    c_negs = [rng.normal(size=sigma) for _ in range(k)]
    g_v, g_pos, g_negs = sgns_gradients(v, c_pos, c_negs)
    eps = 1e-5

    def num_grad(wrt):
        grad = np.zeros_like(wrt)
        for d in range(len(wrt)):
            step = np.zeros_like(wrt)
            step[d] = eps
            hi = sgns_loss(v + step if wrt is v else v,
                           c_pos + step if wrt is c_pos else c_pos,
                           [c + step if wrt is c else c for c in c_negs])
            lo = sgns_loss(v - step if wrt is v else v,
                           c_pos - step if wrt is c_pos else c_pos,
                           [c - step if wrt is c else c for c in c_negs])
            grad[d] = (hi - lo) / (2 * eps)
        return grad

    assert np.allclose(g_v, num_grad(v), rtol=1e-5, atol=1e-8)
    assert np.allclose(g_pos, num_grad(c_pos), rtol=1e-5, atol=1e-8)
    for g, c in zip(g_negs, c_negs):
        assert np.allclose(g, num_grad(c), rtol=1e-5, atol=1e-8)


def test_negative_draws_exclude_positive(toy_corpus):
    _, vocab = toy_corpus
    rng = np.random.default_rng(0)
    cumulative = np.cumsum(vocab.noise_distribution)
    positives = np.array([0, 1, 2, 3, 4, 5] * 50, dtype=np.int64)
    negs = draw_negatives(rng, cumulative, positives, 5)
    assert negs.shape == (300, 5)
    assert (negs != positives[:, None]).all()


def test_training_is_deterministic(toy_corpus):
    docs, vocab = toy_corpus
    cfg = TrainConfig(sigma=6, epochs=15, seed=4)
    a = train(docs, vocab, cfg)
    b = train(docs, vocab, cfg)
    assert np.array_equal(a.E, b.E)
    assert np.array_equal(a.C, b.C)
    assert a.epoch_mean_loss == b.epoch_mean_loss


def test_loss_decreases(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs, vocab, TrainConfig(sigma=6, epochs=20, seed=1))
    losses = model.epoch_mean_loss
    assert losses[19] < losses[0]
    # non-increasing through the first 10 epochs, small noise allowed late
    for e in range(1, 10):
        tolerance = 0.0 if e <= 3 else 1e-6
        assert losses[e] <= losses[e - 1] + tolerance


def test_identical_documents_embed_closer():
    docs = make_docs([
        ("twin1", ["a", "b", "c", "a", "b"]),
        ("twin2", ["a", "b", "c", "a", "b"]),
        ("other", ["x", "y", "z", "w", "x"]),
    ])
    vocab = build_vocabulary(docs)
    model = train(docs, vocab, TrainConfig(sigma=8, epochs=100, seed=3))
    d_twin = np.linalg.norm(model.E[0] - model.E[1])
    assert d_twin < np.linalg.norm(model.E[0] - model.E[2])
    assert d_twin < np.linalg.norm(model.E[1] - model.E[2])


def test_unknown_token_rejected(toy_corpus):
    docs, vocab = toy_corpus
    bad = make_docs([("g9", ["zz"])])
    with pytest.raises(UnknownToken):
        train(docs + bad, vocab, TrainConfig(sigma=4, epochs=1, seed=0))


def test_early_stop_cuts_epochs(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs, vocab, TrainConfig(sigma=6, epochs=200, seed=1,
                                           early_stop_rel_tol=1e-3))
    assert len(model.epoch_mean_loss) < 200


def test_export_shape_and_identity(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs[:3], vocab, TrainConfig(sigma=2, epochs=2, seed=0))
    table = export_metafeatures(model, ["a", "b", "c"])
    assert list(table) == ["a", "b", "c"]
    assert all(len(v) == 2 for v in table.values())
    assert np.array_equal(table["b"], model.E[1])
    with pytest.raises(ShapeMismatch):
        export_metafeatures(model, ["a", "b"])


def test_metafeature_csv_roundtrip_bit_exact(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs, vocab, TrainConfig(sigma=5, epochs=3, seed=8))
    table = export_metafeatures(model, [d.graph_id for d in docs])
    text = metafeatures_to_csv(table)
    back = metafeatures_from_csv(text)
    for name in table:
        assert np.array_equal(back[name], table[name])
    assert metafeatures_to_csv(back) == text


def test_checkpoint_roundtrip(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs, vocab, TrainConfig(sigma=4, epochs=2, seed=2))
    text = save_model(model, [d.graph_id for d in docs])
    header = text.splitlines()[0].split()
    assert header == [str(len(docs)), str(len(vocab)), "4"]
    loaded, names = load_model(text)
    assert names == [d.graph_id for d in docs]
    assert np.array_equal(loaded.E, model.E)
    assert np.array_equal(loaded.C, model.C)


@pytest.mark.skipif("compiled" not in kernels.available_backends(),
                    reason="compiled kernels unavailable")
def test_backends_agree(toy_corpus):
    docs, vocab = toy_corpus
    cfg = TrainConfig(sigma=8, epochs=5, seed=11)
    previous = kernels.backend_name()
    try:
        kernels.use_backend("compiled")
        fast = train(docs, vocab, cfg)
        kernels.use_backend("python")
        slow = train(docs, vocab, cfg)
    finally:
        kernels.use_backend(previous)
    assert np.allclose(fast.E, slow.E, rtol=1e-9, atol=1e-12)
    assert np.allclose(fast.C, slow.C, rtol=1e-9, atol=1e-12)
    assert np.allclose(fast.epoch_mean_loss, slow.epoch_mean_loss, rtol=1e-9)


def test_model_rows_match_documents(toy_corpus):
    docs, vocab = toy_corpus
    model = train(docs, vocab, TrainConfig(sigma=3, epochs=1, seed=0))
    assert isinstance(model, EmbeddingModel)
    assert model.n_graphs == len(docs)
    assert np.isfinite(model.E).all() and np.isfinite(model.C).all()
