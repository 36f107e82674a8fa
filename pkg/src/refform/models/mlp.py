"""Two-hidden-layer perceptron (16 and 8 ReLU units) with a softmax output,
trained by seeded mini-batch gradient descent on cross-entropy.

All randomness (weight initialisation, epoch shuffling) comes from a single
seeded generator, so training is bit-deterministic given the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import N_CLASSES, ModelError, one_hot, softmax


@dataclass(frozen=True)
class MlpParams:
    hidden: tuple[int, int] = (16, 8)
    activation: str = "relu"
    epochs: int = 50
    batch_size: int = 50
    lr: float = 0.1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ModelError(f"lr must be > 0, got {self.lr}")
        if self.epochs < 1:
            raise ModelError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ModelError(f"batch_size must be >= 1, got {self.batch_size}")
        if len(self.hidden) != 2 or any(h < 1 for h in self.hidden):
            raise ModelError(f"hidden must be two positive sizes, got {self.hidden}")
        if self.activation != "relu":
            raise ModelError(f"unsupported activation '{self.activation}'")


def _glorot(rng: np.random.RandomState, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class MlpModel:
    name = "mlp"
    params_cls = MlpParams

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]

    @classmethod
    def init(cls, n_features: int, hp: MlpParams) -> "MlpModel":
        rng = np.random.RandomState(hp.seed)
        sizes = [n_features, hp.hidden[0], hp.hidden[1], N_CLASSES]
        weights = [_glorot(rng, sizes[i], sizes[i + 1]) for i in range(3)]
        biases = [np.zeros(sizes[i + 1]) for i in range(3)]
        return cls(weights, biases)

    def _forward(self, X: np.ndarray):
        h1_pre = X @ self.weights[0] + self.biases[0]
        h1 = np.maximum(h1_pre, 0.0)
        h2_pre = h1 @ self.weights[1] + self.biases[1]
        h2 = np.maximum(h2_pre, 0.0)
        logits = h2 @ self.weights[2] + self.biases[2]
        return h1_pre, h1, h2_pre, h2, logits

    def loss(self, X: np.ndarray, Y: np.ndarray) -> float:
        *_, logits = self._forward(X)
        probs = softmax(logits)
        eps = np.finfo(np.float64).tiny
        return float(-np.sum(Y * np.log(probs + eps)) / len(X))

    def gradients(self, X: np.ndarray, Y: np.ndarray):
        """Mean cross-entropy gradients for every weight and bias."""
        h1_pre, h1, h2_pre, h2, logits = self._forward(X)
        n = len(X)
        delta3 = (softmax(logits) - Y) / n
        grad_W3 = h2.T @ delta3
        delta2 = (delta3 @ self.weights[2].T) * (h2_pre > 0)
        grad_W2 = h1.T @ delta2
        delta1 = (delta2 @ self.weights[1].T) * (h1_pre > 0)
        grad_W1 = X.T @ delta1
        return (
            [grad_W1, grad_W2, grad_W3],
            [delta1.sum(axis=0), delta2.sum(axis=0), delta3.sum(axis=0)],
        )

    @classmethod
    def train(cls, X, y, hp: MlpParams, groups=None) -> "MlpModel":
        X = np.asarray(X, dtype=np.float64)
        Y = one_hot(np.asarray(y, dtype=np.int64))
        model = cls.init(X.shape[1], hp)
        rng = np.random.RandomState(hp.seed + 1)
        n = len(X)
        for _ in range(hp.epochs):
            order = rng.permutation(n)
            for start in range(0, n, hp.batch_size):
                batch = order[start:start + hp.batch_size]
                Xb, Yb = X[batch], Y[batch]
                if not np.isfinite(model.loss(Xb, Yb)):
                    raise ModelError(
                        "training loss is not finite; use a smaller learning rate"
                    )
                grads_W, grads_b = model.gradients(Xb, Yb)
                for i in range(3):
                    model.weights[i] -= hp.lr * grads_W[i]
                    model.biases[i] -= hp.lr * grads_b[i]
        return model

    def predict_proba(self, X, groups=None) -> np.ndarray:
        *_, logits = self._forward(np.asarray(X, dtype=np.float64))
        return softmax(logits)

    def to_params(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_params(cls, params: dict) -> "MlpModel":
        return cls(
            [np.array(w) for w in params["weights"]],
            [np.array(b) for b in params["biases"]],
        )
