"""Multinomial logistic regression trained by full-batch gradient descent.

The loss is mean cross-entropy plus an L2 penalty on the weight matrix
(biases are not penalised).  Initialisation is all-zeros, so training is
fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import N_CLASSES, ModelError, one_hot, softmax


@dataclass(frozen=True)
class MaxEntParams:
    lr: float = 0.1
    epochs: int = 500
    l2: float = 1e-4

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ModelError(f"lr must be > 0, got {self.lr}")
        if self.epochs < 1:
            raise ModelError(f"epochs must be >= 1, got {self.epochs}")
        if self.l2 < 0:
            raise ModelError(f"l2 must be >= 0, got {self.l2}")


def loss_and_grads(W, b, X, Y, l2):
    """Regularised cross-entropy and its gradients for one full batch.

    Overflow is deliberately left to produce non-finite values here; the
    training loop turns them into a diagnosable error.
    """
    n = len(X)
    with np.errstate(over="ignore", invalid="ignore"):
        probs = softmax(X @ W + b)
        eps = np.finfo(np.float64).tiny
        loss = -np.sum(Y * np.log(probs + eps)) / n + 0.5 * l2 * np.sum(W * W)
        delta = (probs - Y) / n
        return loss, X.T @ delta + l2 * W, delta.sum(axis=0)


class MaxEntModel:
    name = "maxent"
    params_cls = MaxEntParams

    def __init__(self, W: np.ndarray, b: np.ndarray,
                 loss_history: list[float] | None = None):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.loss_history = loss_history or []

    @classmethod
    def train(cls, X, y, hp: MaxEntParams, groups=None) -> "MaxEntModel":
        X = np.asarray(X, dtype=np.float64)
        Y = one_hot(np.asarray(y, dtype=np.int64))
        W = np.zeros((X.shape[1], N_CLASSES))
        b = np.zeros(N_CLASSES)
        history = []
        for _ in range(hp.epochs):
            loss, grad_W, grad_b = loss_and_grads(W, b, X, Y, hp.l2)
            if not np.isfinite(loss):
                raise ModelError(
                    "training loss is not finite; use a smaller learning rate"
                )
            history.append(float(loss))
            W -= hp.lr * grad_W
            b -= hp.lr * grad_b
        return cls(W, b, history)

    def predict_proba(self, X, groups=None) -> np.ndarray:
        return softmax(np.asarray(X, dtype=np.float64) @ self.W + self.b)

    def to_params(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_params(cls, params: dict) -> "MaxEntModel":
        return cls(np.array(params["W"]), np.array(params["b"]))
