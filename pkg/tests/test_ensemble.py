import itertools

import numpy as np
import pytest

from textvote.ensemble import (ArchRanges, EnsembleConfig, TrainedEnsemble,
                               majority_vote, sample_ensemble_specs,
                               sample_spec, train_ensemble)


def test_majority_vote_hand_cases():
    assert majority_vote([1, 1, 0]) == 1
    assert majority_vote([0, 0, 0, 0, 0]) == 0
    assert majority_vote([1, 1, 0, 0]) == 0  # exact tie -> class 0
    assert majority_vote([1]) == 1


def test_majority_vote_matches_brute_force_exhaustively():
    for n in range(1, 10):
        for votes in itertools.product((0, 1), repeat=n):
            brute = 1 if sum(votes) > n / 2 else 0
            assert majority_vote(list(votes)) == brute


def test_majority_vote_permutation_invariant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        votes = list(rng.integers(0, 2, size=7))
        shuffled = list(votes)
        rng.shuffle(shuffled)
        assert majority_vote(votes) == majority_vote(shuffled)


def test_majority_vote_empty_rejected():
    with pytest.raises(ValueError):
        majority_vote([])


def test_sample_spec_degenerate_ranges():
    ranges = ArchRanges(dnn_layers=(2, 2), dnn_units=(10, 10),
                        dropout=(0.0, 0.0))
    a = sample_spec(np.random.default_rng(1), "dnn", ranges, model_seed=5)
    b = sample_spec(np.random.default_rng(1), "dnn", ranges, model_seed=5)
    assert a.layers == b.layers
    dense = [l for l in a.layers if l["kind"] == "dense"]
    assert len(dense) == 2 and all(l["units"] == 10 for l in dense)


def test_sample_spec_respects_ranges():
    ranges = ArchRanges(dnn_layers=(1, 3), dnn_units=(64, 512))
    rng = np.random.default_rng(2)
    for _ in range(1000):
        spec = sample_spec(rng, "dnn", ranges, model_seed=0)
        dense = [l for l in spec.layers if l["kind"] == "dense"]
        assert 1 <= len(dense) <= 3
        assert all(64 <= l["units"] <= 512 for l in dense)
        drops = [l["rate"] for l in spec.layers if l["kind"] == "dropout"]
        assert all(0.0 <= r < 1.0 for r in drops)


def test_cnn_spec_shape():
    ranges = ArchRanges()
    rng = np.random.default_rng(3)
    spec = sample_spec(rng, "cnn", ranges, model_seed=0)
    kinds = [l["kind"] for l in spec.layers]
    assert "conv1d" in kinds and "maxpool1d" in kinds and "flatten" in kinds
    convs = [l for l in spec.layers if l["kind"] == "conv1d"]
    assert all(3 <= l["width"] <= 7 and 32 <= l["filters"] <= 128 for l in convs)


def test_per_model_seed_is_xor():
    cfg = EnsembleConfig(d=3, c=0, seed=12345)
    specs = sample_ensemble_specs(cfg)
    assert [s.seed for s in specs] == [12345 ^ 0, 12345 ^ 1, 12345 ^ 2]


def _toy_problem(n=120, dim=6, seed=0):
    # two linearly separable blobs
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 2
    X = rng.normal(size=(n, dim)) + 3.0 * y[:, None]
    return X, y


def _fast_ranges():
    return ArchRanges(dnn_layers=(1, 1), dnn_units=(8, 16), dropout=(0.0, 0.0))


def test_single_model_ensemble_equals_member():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=1, c=0, ranges=_fast_ranges(), epochs=20, seed=4)
    ens = train_ensemble(X, None, y, cfg)
    votes = ens.predict_votes(X, None)
    assert votes.shape == (len(y), 1)
    assert np.array_equal(ens.predict(X, None), votes[:, 0])


def test_training_is_reproducible():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=3, c=0, ranges=_fast_ranges(), epochs=5, seed=6)
    v1 = train_ensemble(X, None, y, cfg).predict_votes(X, None)
    v2 = train_ensemble(X, None, y, cfg).predict_votes(X, None)
    assert np.array_equal(v1, v2)


def test_jobs_do_not_change_result():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=3, c=0, ranges=_fast_ranges(), epochs=3, seed=7)
    v1 = train_ensemble(X, None, y, cfg, jobs=1).predict_votes(X, None)
    v2 = train_ensemble(X, None, y, cfg, jobs=3).predict_votes(X, None)
    assert np.array_equal(v1, v2)


def test_xor_is_learnable():
    rng = np.random.default_rng(8)
    base = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    X = np.tile(base, (40, 1)) + rng.normal(scale=0.05, size=(160, 2))
    y = np.tile(np.array([0, 1, 1, 0]), 40)
    ranges = ArchRanges(dnn_layers=(2, 2), dnn_units=(16, 32), dropout=(0.0, 0.0))
    cfg = EnsembleConfig(d=3, c=0, ranges=ranges, epochs=200, seed=9, lr=0.01)
    ens = train_ensemble(X, None, y, cfg)
    acc = (ens.predict(X, None) == y).mean()
    assert acc >= 0.95


def test_final_always_recomputable_from_votes():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=3, c=0, ranges=_fast_ranges(), epochs=3, seed=10)
    ens = train_ensemble(X, None, y, cfg)
    votes = ens.predict_votes(X, None)
    final = ens.predict(X, None)
    for row, f in zip(votes, final):
        assert f == majority_vote(row)


def test_save_load_roundtrip(tmp_path):
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=2, c=0, ranges=_fast_ranges(), epochs=3, seed=11)
    with pytest.warns(UserWarning, match="even ensemble"):
        ens = train_ensemble(X, None, y, cfg)
    ens.save(str(tmp_path / "run"))
    back = TrainedEnsemble.load(str(tmp_path / "run"))
    assert np.array_equal(ens.predict_votes(X, None),
                          back.predict_votes(X, None))
    assert back.config.seed == 11
    assert back.loss_curves == ens.loss_curves


def test_missing_features_rejected():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=0, c=1, epochs=1, seed=12)
    with pytest.raises(ValueError, match="c > 0"):
        train_ensemble(None, None, y, cfg)


def test_softmax_head_votes_by_argmax():
    X, y = _toy_problem()
    cfg = EnsembleConfig(d=1, c=0, ranges=_fast_ranges(), epochs=40,
                         seed=13, head="softmax", lr=0.01)
    ens = train_ensemble(X, None, y, cfg)
    votes = ens.predict_votes(X, None)
    assert set(np.unique(votes)) <= {0, 1}
    assert (votes[:, 0] == y).mean() > 0.9
