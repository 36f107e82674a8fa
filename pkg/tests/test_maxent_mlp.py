import numpy as np
import pytest

from refform.models.base import ModelError, one_hot
from refform.models.maxent import MaxEntModel, MaxEntParams, loss_and_grads
from refform.models.mlp import MlpModel, MlpParams

DESC, NAME, PRON = 0, 1, 2


def separable_set():
    """12 rows, 2 features, one class per corner region."""
    X = np.array([
        [0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [0.1, 0.1],
        [1.0, 0.0], [0.9, 0.0], [1.0, 0.1], [0.9, 0.1],
        [0.0, 1.0], [0.1, 1.0], [0.0, 0.9], [0.1, 0.9],
    ])
    y = np.array([DESC] * 4 + [NAME] * 4 + [PRON] * 4)
    return X, y


class TestMaxEnt:
    def test_one_class_probability_grows(self):
        X = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        y = np.full(3, NAME)
        model = MaxEntModel.train(X, y, MaxEntParams())
        probs = model.predict_proba(np.array([[0.5, 0.5], [0.0, 0.0]]))
        assert (probs[:, NAME] >= 0.9).all()

    def test_separable_set_fits_perfectly(self):
        X, y = separable_set()
        model = MaxEntModel.train(X, y, MaxEntParams())
        assert (np.argmax(model.predict_proba(X), axis=1) == y).all()

    def test_gradient_matches_finite_differences(self):
        rng = np.random.RandomState(12)
        X = rng.rand(5, 4)
        Y = one_hot(rng.randint(0, 3, size=5))
        W = rng.randn(4, 3) * 0.5
        b = rng.randn(3) * 0.5
        l2 = 1e-3
        _, grad_W, grad_b = loss_and_grads(W, b, X, Y, l2)
        eps = 1e-5

        def numeric(param, setter):
            grad = np.zeros_like(param)
            flat = param.ravel()
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + eps
                hi = loss_and_grads(W, b, X, Y, l2)[0]
                flat[i] = orig - eps
                lo = loss_and_grads(W, b, X, Y, l2)[0]
                flat[i] = orig
                grad.ravel()[i] = (hi - lo) / (2 * eps)
            return grad

        num_W = numeric(W, None)
        num_b = numeric(b, None)
        scale = max(np.abs(num_W).max(), np.abs(num_b).max())
        assert np.abs(grad_W - num_W).max() / scale < 1e-4
        assert np.abs(grad_b - num_b).max() / scale < 1e-4

    def test_loss_history_non_increasing_at_defaults(self):
        for seed in (0, 1, 2):
            rng = np.random.RandomState(seed)
            X = (rng.rand(30, 6) > 0.5).astype(float)
            y = rng.randint(0, 3, size=30)
            model = MaxEntModel.train(X, y, MaxEntParams())
            diffs = np.diff(model.loss_history)
            assert (diffs <= 1e-12).all()

    def test_huge_learning_rate_raises(self):
        X, y = separable_set()
        with pytest.raises(ModelError, match="learning rate"):
            MaxEntModel.train(X, y, MaxEntParams(lr=1e200, epochs=8))

    def test_output_bias_shift_keeps_labels(self):
        X, y = separable_set()
        model = MaxEntModel.train(X, y, MaxEntParams(epochs=50))
        before = np.argmax(model.predict_proba(X), axis=1)
        model.b = model.b + 7.5
        after = np.argmax(model.predict_proba(X), axis=1)
        assert np.array_equal(before, after)


class TestMlp:
    def test_training_is_deterministic_given_seed(self):
        X, y = separable_set()
        hp = MlpParams(seed=13)
        first = MlpModel.train(X, y, hp).predict_proba(X)
        second = MlpModel.train(X, y, hp).predict_proba(X)
        assert np.array_equal(first, second)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.RandomState(7)
        X = rng.rand(4, 5)
        Y = one_hot(rng.randint(0, 3, size=4))
        model = MlpModel.init(5, MlpParams(seed=21))
        # keep clear of the ReLU kinks so both finite-difference sides agree
        h1_pre, _, h2_pre, _, _ = model._forward(X)
        assert min(np.abs(h1_pre).min(), np.abs(h2_pre).min()) > 1e-4

        grads_W, grads_b = model.gradients(X, Y)
        eps = 1e-6
        worst = 0.0
        for params, grads in ((model.weights, grads_W), (model.biases, grads_b)):
            for param, grad in zip(params, grads):
                flat = param.ravel()
                numeric = np.zeros_like(flat)
                for i in range(flat.size):
                    orig = flat[i]
                    flat[i] = orig + eps
                    hi = model.loss(X, Y)
                    flat[i] = orig - eps
                    lo = model.loss(X, Y)
                    flat[i] = orig
                    numeric[i] = (hi - lo) / (2 * eps)
                scale = max(np.abs(numeric).max(), 1e-8)
                worst = max(worst, np.abs(grad.ravel() - numeric).max() / scale)
        assert worst < 1e-3

    def test_one_class_data_predicted_everywhere(self):
        rng = np.random.RandomState(2)
        X = rng.rand(30, 4)
        y = np.full(30, DESC)
        model = MlpModel.train(X, y, MlpParams(seed=5))
        preds = np.argmax(model.predict_proba(rng.rand(10, 4)), axis=1)
        assert (preds == DESC).all()

    def test_output_bias_shift_keeps_labels(self):
        X, y = separable_set()
        model = MlpModel.train(X, y, MlpParams(seed=3))
        before = np.argmax(model.predict_proba(X), axis=1)
        model.biases[2] = model.biases[2] - 4.25
        after = np.argmax(model.predict_proba(X), axis=1)
        assert np.array_equal(before, after)

    def test_serialization_round_trip(self):
        X, y = separable_set()
        model = MlpModel.train(X, y, MlpParams(seed=11))
        clone = MlpModel.from_params(model.to_params())
        assert np.array_equal(model.predict_proba(X), clone.predict_proba(X))
