"""Gradient-boosted regression trees on the multiclass softmax objective.

Each boosting round fits one regression tree per class to the first- and
second-order statistics of the current softmax fit (g = p - 1[y=c],
h = p(1-p)); leaf weights are the damped Newton step -G/(H+lambda) and a
split is accepted only when its gain exceeds ``min_split_loss``.  Rows are
subsampled once per round with the seeded generator; with subsample = 1 no
random draw happens at all, so the seed cannot influence the model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import N_CLASSES, ModelError, one_hot, softmax


@dataclass(frozen=True)
class GbtParams:
    learning_rate: float = 0.05
    min_split_loss: float = 0.01
    max_depth: int = 5
    subsample: float = 0.5
    n_rounds: int = 100
    reg_lambda: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ModelError(f"learning_rate must be > 0, got {self.learning_rate}")
        if not 0.0 < self.subsample <= 1.0:
            raise ModelError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.max_depth < 1:
            raise ModelError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.n_rounds < 1:
            raise ModelError(f"n_rounds must be >= 1, got {self.n_rounds}")
        if self.min_split_loss < 0:
            raise ModelError(f"min_split_loss must be >= 0, got {self.min_split_loss}")
        if self.reg_lambda < 0:
            raise ModelError(f"reg_lambda must be >= 0, got {self.reg_lambda}")


def _leaf_weight(g_sum: float, h_sum: float, lam: float) -> float:
    return -g_sum / (h_sum + lam)


def _split_gain(gl, hl, gr, hr, lam) -> float:
    g, h = gl + gr, hl + hr
    return 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - g * g / (h + lam))


def _grow(X, g, h, depth, params: GbtParams) -> dict:
    g_sum, h_sum = float(g.sum()), float(h.sum())
    if depth >= params.max_depth or len(g) < 2:
        return {"weight": _leaf_weight(g_sum, h_sum, params.reg_lambda)}
    best = None  # (gain, column, threshold)
    for j in range(X.shape[1]):
        col = X[:, j]
        values = np.unique(col)
        if len(values) < 2:
            continue
        for thr in (values[:-1] + values[1:]) / 2.0:
            mask = col <= thr
            gl, hl = float(g[mask].sum()), float(h[mask].sum())
            gain = _split_gain(gl, hl, g_sum - gl, h_sum - hl, params.reg_lambda)
            if best is None or gain > best[0] + 1e-12:
                best = (gain, j, float(thr))
    if best is None or best[0] <= params.min_split_loss:
        return {"weight": _leaf_weight(g_sum, h_sum, params.reg_lambda)}
    _, column, threshold = best
    mask = X[:, column] <= threshold
    return {
        "column": column,
        "threshold": threshold,
        "left": _grow(X[mask], g[mask], h[mask], depth + 1, params),
        "right": _grow(X[~mask], g[~mask], h[~mask], depth + 1, params),
    }


def _tree_predict(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X), dtype=np.float64)
    stack = [(node, np.arange(len(X)))]
    while stack:
        nd, rows = stack.pop()
        if len(rows) == 0:
            continue
        if "weight" in nd:
            out[rows] = nd["weight"]
            continue
        mask = X[rows, nd["column"]] <= nd["threshold"]
        stack.append((nd["left"], rows[mask]))
        stack.append((nd["right"], rows[~mask]))
    return out


def tree_columns(node: dict) -> set[int]:
    """Columns used by any split of one tree."""
    if "weight" in node:
        return set()
    return {node["column"]} | tree_columns(node["left"]) | tree_columns(node["right"])


class GbtModel:
    name = "gbt"
    params_cls = GbtParams

    def __init__(self, rounds: list[list[dict]], learning_rate: float):
        self.rounds = rounds  # per round, one tree per class
        self.learning_rate = learning_rate

    @classmethod
    def train(cls, X, y, hp: GbtParams, groups=None) -> "GbtModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(y) == 0:
            raise ModelError("empty training table")
        n = len(y)
        Y = one_hot(y)
        margins = np.zeros((n, N_CLASSES))
        rng = np.random.RandomState(hp.seed)
        rounds: list[list[dict]] = []
        for _ in range(hp.n_rounds):
            probs = softmax(margins)
            grad = probs - Y
            hess = probs * (1.0 - probs)
            if hp.subsample < 1.0:
                rows = rng.permutation(n)[: max(1, int(round(hp.subsample * n)))]
            else:
                rows = np.arange(n)
            trees = []
            for c in range(N_CLASSES):
                tree = _grow(X[rows], grad[rows, c], hess[rows, c], 0, hp)
                trees.append(tree)
                margins[:, c] += hp.learning_rate * _tree_predict(tree, X)
            rounds.append(trees)
        return cls(rounds, hp.learning_rate)

    def decision_margins(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        margins = np.zeros((len(X), N_CLASSES))
        for trees in self.rounds:
            for c, tree in enumerate(trees):
                margins[:, c] += self.learning_rate * _tree_predict(tree, X)
        return margins

    def predict_proba(self, X, groups=None) -> np.ndarray:
        return softmax(self.decision_margins(X))

    def used_columns(self) -> set[int]:
        """Feature-matrix columns used by at least one split in the ensemble."""
        used: set[int] = set()
        for trees in self.rounds:
            for tree in trees:
                used |= tree_columns(tree)
        return used

    def to_params(self) -> dict:
        return {"learning_rate": self.learning_rate, "rounds": self.rounds}

    @classmethod
    def from_params(cls, params: dict) -> "GbtModel":
        return cls(params["rounds"], float(params["learning_rate"]))
