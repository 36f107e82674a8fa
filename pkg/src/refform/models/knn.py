"""k-nearest-neighbour classifier on the encoded feature matrix.

Distance is squared Euclidean, which on one-hot blocks equals twice the
Hamming distance between categorical values.  Distance ties resolve in
training-row order; vote ties resolve in canonical label order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import N_CLASSES, ModelError


@dataclass(frozen=True)
class KnnParams:
    k: int = 5

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ModelError(f"k must be >= 1, got {self.k}")


class KnnModel:
    name = "knn"
    params_cls = KnnParams

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int):
        self.X = np.asarray(X, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.int64)
        self.k = k

    @classmethod
    def train(cls, X, y, hp: KnnParams, groups=None) -> "KnnModel":
        if hp.k > len(y):
            raise ModelError(f"k={hp.k} exceeds the {len(y)} training rows")
        return cls(X, y, hp.k)

    def predict_proba(self, X, groups=None) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        # (n_query, n_train) squared distances
        d = ((X[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
        # stable sort keeps training-row order among exact distance ties
        order = np.argsort(d, axis=1, kind="stable")[:, : self.k]
        probs = np.zeros((len(X), N_CLASSES), dtype=np.float64)
        for c in range(N_CLASSES):
            probs[:, c] = (self.y[order] == c).sum(axis=1)
        return probs / self.k

    def to_params(self) -> dict:
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, params: dict) -> "KnnModel":
        return cls(np.array(params["X"]), np.array(params["y"]), int(params["k"]))
