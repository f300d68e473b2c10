import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import SEEDS
from tgsemiring import nn, trainer
from tgsemiring.errors import ConfigError, TrainingError, UsageError
from tgsemiring.nn import DenseLayer, Network
from tgsemiring.task import CLASS_A, CLASS_B, full_domain, split

feature_sets = arrays(np.float64, (4, 8), elements=st.floats(-5, 5))


def hand_loss(f, margin):
    """Direct transcription of the six terms."""
    d = lambda i, j: float(np.sqrt(sum((a - b) ** 2 for a, b in zip(f[i], f[j]))))
    terms = [d(0, 1), d(2, 3)] + [max(0.0, margin - d(i, j)) for i, j in ((0, 2), (0, 3), (1, 2), (1, 3))]
    return sum(terms) / 6


def feature_net(features):
    """2 -> 4 one-hot ReLU layer -> features; realises any four feature rows exactly."""
    # hidden unit k fires (value 1) only on element k
    w1 = np.array([[-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]])
    b1 = np.array([1.0, -1.0, 0.0, 0.0])
    return Network((DenseLayer(w1, b1, "relu"), DenseLayer(np.asarray(features, float).T, np.zeros(len(features[0])))))


class TestLogicLoss:
    def test_floor(self):
        f = np.zeros((4, 8))
        f[2:, 0] = 3.0
        assert trainer.logic_loss(f, 2.0) == 0.0

    def test_all_identical(self):
        assert trainer.logic_loss(np.ones((4, 8)), 2.0) == pytest.approx(4 * 2.0 / 6)

    def test_hand_example(self):
        f = np.zeros((4, 8))
        f[0, 0] = 1.0
        assert trainer.logic_loss(f, 2.0) == pytest.approx(7 / 6)

    def test_bad_shape(self):
        with pytest.raises(ConfigError):
            trainer.logic_loss(np.zeros((3, 8)))

    def test_non_finite(self):
        f = np.zeros((4, 8))
        f[1, 1] = np.nan
        with pytest.raises(TrainingError):
            trainer.logic_loss(f)

    @settings(max_examples=200)
    @given(feature_sets, st.floats(0.1, 5))
    def test_matches_transcription(self, f, margin):
        assert trainer.logic_loss(f, margin) == pytest.approx(hand_loss(f, margin), rel=1e-12, abs=1e-12)

    @given(feature_sets)
    def test_nonnegative_and_swap_invariant(self, f):
        base = trainer.logic_loss(f)
        assert base >= 0
        assert trainer.logic_loss(f[[1, 0, 2, 3]]) == pytest.approx(base, abs=1e-12)
        assert trainer.logic_loss(f[[0, 1, 3, 2]]) == pytest.approx(base, abs=1e-12)

    @given(feature_sets)
    def test_zero_iff_structure(self, f):
        loss = trainer.logic_loss(f, 2.0)
        d = lambda i, j: np.linalg.norm(f[i] - f[j])
        structured = d(0, 1) == 0 and d(2, 3) == 0 and all(d(i, j) >= 2.0 for i, j in trainer.CROSS_PAIRS)
        assert (loss == 0.0) == structured

    @settings(max_examples=50)
    @given(arrays(np.float64, (4, 8), elements=st.floats(-2, 2)))
    def test_gradient_matches_central_differences(self, f):
        _, g = trainer.logic_loss_and_grad(f)
        h = 1e-6
        dists = [np.linalg.norm(f[i] - f[j]) for i, j in itertools.combinations(range(4), 2)]
        # stay away from the non-differentiable points
        if min(dists) < 1e-3 or min(abs(d - 2.0) for d in dists) < 1e-3:
            return
        for idx in itertools.product(range(4), range(8)):
            up, down = f.copy(), f.copy()
            up[idx] += h
            down[idx] -= h
            fd = (hand_loss(up, 2.0) - hand_loss(down, 2.0)) / (2 * h)
            assert g[idx] == pytest.approx(fd, abs=1e-6)


class TestConfig:
    def test_defaults(self):
        cfg = trainer.TrainConfig()
        assert (cfg.epochs, cfg.margin, cfg.learning_rate, cfg.threshold) == (1000, 2.0, 1e-2, 1.0)

    @pytest.mark.parametrize("kw", [{"epochs": 0}, {"margin": 0}, {"learning_rate": -1}, {"prototype_threshold": 0},
                                    {"schedule": "step"}])
    def test_rejected(self, kw):
        with pytest.raises(ConfigError):
            trainer.TrainConfig(**kw)

    def test_cosine_schedule(self):
        cfg = trainer.TrainConfig(epochs=100)
        assert cfg.lr_at(0) == 1e-2
        assert cfg.lr_at(50) == pytest.approx(5e-3)
        assert trainer.TrainConfig(schedule="constant").lr_at(999) == 1e-2


class TestTrainLogic:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_converges(self, trained, seed):
        assert trained[seed].final_loss < 1e-2

    def test_deterministic(self, trained):
        again = trainer.train_logic(trainer.TrainConfig(seed=0))
        for (w, b), (w2, b2) in zip(trained[0].network.parameters(), again.network.parameters()):
            assert w.tobytes() == w2.tobytes() and b.tobytes() == b2.tobytes()

    def test_loss_history(self, trained):
        losses = trained[0].losses
        assert len(losses) == 1000
        assert losses[-1] < losses[0]

    def test_listing_architecture(self, trained):
        assert trained[0].network.dims == [2, 16, 16, 8]


class TestPrototype:
    def test_mean_of_equals(self):
        v = np.arange(8.0)
        clf = trainer.build_prototype(feature_net([v, v, -v, -v]), 1.0)
        np.testing.assert_allclose(clf.prototype_a, v)

    def test_midpoint(self):
        a, z = np.zeros(8), np.zeros(8)
        a[0] = 2.0
        clf = trainer.build_prototype(feature_net([a, z, z, z]), 1.0)
        np.testing.assert_allclose(clf.prototype_a, [1.0] + [0.0] * 7)

    def test_trained_prototype_close(self, trained):
        clf = trainer.build_prototype(trained[0].network, 1.0)
        f0 = trainer.encode(trained[0].network)[0]
        assert np.linalg.norm(f0 - clf.prototype_a) < 0.05

    def test_bad_threshold(self, trained):
        with pytest.raises(ConfigError):
            trainer.build_prototype(trained[0].network, 0.0)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_test_elements_are_b(self, trained, seed):
        clf = trainer.build_prototype(trained[seed].network, 1.0)
        red_circle, blue_square = split()[1]
        assert trainer.classify(clf, red_circle) == CLASS_B
        assert trainer.classify(clf, blue_square) == CLASS_B

    def test_zero_distance_is_a(self):
        v = np.ones(8)
        clf = trainer.build_prototype(feature_net([v, v, v, 3 * v]), 0.5)
        assert trainer.classify(clf, full_domain()[2]) == CLASS_A

    @settings(max_examples=30)
    @given(st.integers(0, 2**31))
    def test_depends_only_on_distance_to_prototype(self, seed):
        # a rotation + translation of the feature space keeps every prediction
        rng = np.random.default_rng(seed)
        feats = rng.normal(size=(4, 8)) * 2
        q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        moved = feats @ q.T + rng.normal(size=8)
        c1 = trainer.build_prototype(feature_net(feats), 1.3)
        c2 = trainer.build_prototype(feature_net(moved), 1.3)
        for e in full_domain():
            if abs(c1.distance(e) - 1.3) > 1e-9:
                assert trainer.classify(c1, e) == trainer.classify(c2, e)


class TestBaseline:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_table1(self, baselines, seed):
        predict = trainer.argmax_predictor(baselines[seed].network)
        train, test = split()
        assert trainer.evaluate(predict, train) == 1.0
        assert trainer.evaluate(predict, test) == 0.0
        assert {predict(e) for e in full_domain()} == {CLASS_A}

    def test_architecture(self, baselines):
        assert baselines[0].network.dims == [2, 16, 16, 2]

    def test_deterministic(self, baselines):
        again = trainer.train_baseline(trainer.TrainConfig(seed=0))
        assert again.network.layers[0].weights.tobytes() == baselines[0].network.layers[0].weights.tobytes()

    def test_softmax_xent_gradient(self):
        logits = np.array([[0.3, -1.2], [2.0, 0.5]])
        loss, g = trainer.softmax_xent_and_grad(logits, [0, 1])
        h = 1e-6
        for idx in itertools.product(range(2), range(2)):
            up, down = logits.copy(), logits.copy()
            up[idx] += h
            down[idx] -= h
            fd = (trainer.softmax_xent_and_grad(up, [0, 1])[0] - trainer.softmax_xent_and_grad(down, [0, 1])[0]) / (2 * h)
            assert g[idx] == pytest.approx(fd, abs=1e-8)


class TestEvaluate:
    def test_rows(self):
        train, test = split()
        assert trainer.evaluate(lambda e: e.class_label, test) == 1.0
        assert trainer.evaluate(lambda e: CLASS_A, test) == 0.0
        assert trainer.evaluate(lambda e: CLASS_A, train) == 1.0

    def test_empty(self):
        with pytest.raises(UsageError):
            trainer.evaluate(lambda e: 0, [])


class TestDistanceMatrix:
    def test_zero_network(self):
        net = Network((DenseLayer(np.zeros((8, 2)), np.zeros(8)),))
        assert not trainer.distance_matrix(net).any()

    @pytest.mark.parametrize("seed", SEEDS)
    def test_trained_structure(self, trained, seed):
        d = trainer.distance_matrix(trained[seed].network)
        np.testing.assert_allclose(d, d.T)
        assert not np.diag(d).any()
        assert d[0, 1] < 0.05 and d[2, 3] < 0.05
        cross = [d[i, j] for i, j in trainer.CROSS_PAIRS]
        assert min(cross) >= 0.9 * 2.0
        assert min(cross) / max(d[0, 1], d[2, 3]) >= 50

    def test_matches_pairwise_norms(self, trained):
        f = trainer.encode(trained[1].network)
        d = trainer.distance_matrix(trained[1].network)
        for i, j in itertools.product(range(4), repeat=2):
            assert d[i, j] == pytest.approx(np.sqrt(np.sum((f[i] - f[j]) ** 2)), rel=1e-12, abs=1e-15)


def test_constant_schedule_still_runs():
    res = trainer.train_logic(trainer.TrainConfig(seed=0, epochs=20, schedule="constant"))
    assert np.isfinite(res.final_loss)


def test_divergence_reports_epoch(monkeypatch):
    calls = {"n": 0}
    real = nn.forward

    def poisoned(net, x):
        out, tr = real(net, x)
        calls["n"] += 1
        if calls["n"] == 3:
            out = out.copy()
            out[0, 0] = np.inf
        return out, tr

    monkeypatch.setattr(nn, "forward", poisoned)
    with pytest.raises(TrainingError, match="epoch 2"):
        trainer.train_logic(trainer.TrainConfig(seed=0, epochs=5))
