"""Tests for the optimizer, early stopping and the training loop."""

import numpy as np
import pytest

from seamgraph.gnn.model import binarize, forward, init_model
from seamgraph.gnn.training import Adam, EarlyStopping, prepare_sample, train
from seamgraph.models import ModelSpec, SyntheticParams, TrainConfig
from seamgraph.toolkit.metrics import metrics, pooled_metrics
from seamgraph.toolkit.synthetic import synthetic_set

SMALL = SyntheticParams(segments=6, rings=2)
COARSE = SyntheticParams(segments=8, rings=4)


def _samples(count: int = 3, seed: int = 0):
    return [prepare_sample(m, y) for m, y in synthetic_set(count, seed=seed, base=SMALL)]


def _spec(arch: str = "gcn") -> ModelSpec:
    return ModelSpec(arch=arch, hidden=8, layers=2, heads=2, out_heads=2)


class TestEarlyStopping:
    def test_stops_after_patience_idle_epochs(self):
        stopper = EarlyStopping(patience=2)
        results = [stopper.update(i + 1, loss) for i, loss in enumerate([3.0, 2.0, 2.5, 2.4])]
        assert results == [(True, False), (True, False), (False, False), (False, True)]
        assert stopper.best == 2.0
        assert stopper.best_epoch == 2

    def test_improvement_resets_counter(self):
        stopper = EarlyStopping(patience=2)
        for epoch, loss in enumerate([1.0, 1.5, 0.5, 0.7], start=1):
            _, stop = stopper.update(epoch, loss)
            assert not stop

    def test_patience_must_be_positive(self):
        with pytest.raises(ValueError):
            EarlyStopping(0)


class TestAdam:
    def test_first_step_is_sign_scaled(self):
        params = {"w": np.array([[1.0, -2.0, 0.5]])}
        grads = {"w": np.array([[0.3, -4.0, 1e-3]])}
        config = TrainConfig(learning_rate=0.01)
        Adam(params, config).step(params, grads)
        g = grads["w"]
        expected = np.array([[1.0, -2.0, 0.5]]) - 0.01 * g / (np.abs(g) + config.adam_eps)
        np.testing.assert_allclose(params["w"], expected, rtol=1e-12)

    def test_zero_gradient_leaves_params(self):
        params = {"w": np.ones((2, 2))}
        Adam(params, TrainConfig()).step(params, {"w": np.zeros((2, 2))})
        np.testing.assert_array_equal(params["w"], np.ones((2, 2)))


class TestTrain:
    def test_empty_sets(self):
        model = init_model(_spec())
        samples = _samples(1)
        with pytest.raises(ValueError, match="training set"):
            train(model, [], samples, TrainConfig())
        with pytest.raises(ValueError, match="validation set"):
            train(model, samples, [], TrainConfig())

    def test_history_and_input_untouched(self):
        model = init_model(_spec())
        before = {k: v.copy() for k, v in model.params.items()}
        samples = _samples(2)
        _, history = train(model, samples, samples, TrainConfig(max_epochs=3))
        assert [r.epoch for r in history.epochs] == [1, 2, 3]
        assert history.best_val_loss == min(r.val_loss for r in history.epochs)
        assert all(np.array_equal(before[k], model.params[k]) for k in before)

    @pytest.mark.parametrize("arch", ["gcn", "gat"])
    def test_same_seed_same_parameters(self, arch):
        samples = _samples(2)
        config = TrainConfig(max_epochs=3, rng_seed=7, learning_rate=1e-2)
        a, _ = train(init_model(_spec(arch), seed=1), samples, samples, config)
        b, _ = train(init_model(_spec(arch), seed=1), samples, samples, config)
        assert all(np.array_equal(a.params[k], b.params[k]) for k in a.params)

    def test_early_stop_flag(self):
        samples = _samples(1)
        config = TrainConfig(max_epochs=200, patience=1, learning_rate=0.5)
        _, history = train(init_model(_spec()), samples, samples, config)
        assert history.stopped_early
        assert len(history.epochs) < 200

    @pytest.mark.slow
    @pytest.mark.parametrize("arch", ["gcn", "gat"])
    def test_overfits_small_set(self, arch):
        pairs = synthetic_set(3, seed=0, base=COARSE)
        samples = [prepare_sample(m, y) for m, y in pairs]
        config = TrainConfig(max_epochs=500, patience=500)
        model, _ = train(init_model(ModelSpec(arch=arch)), samples, samples, config)
        scores = [metrics(binarize(forward(model, s.dual)), s.labels) for s in samples]
        assert pooled_metrics(scores).accuracy >= 99.5
