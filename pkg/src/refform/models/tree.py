"""Entropy decision tree with multi-class adaptive boosting.

Splits are binary, on a column threshold (0.5 for one-hot and binary
columns, midpoints between observed values for ordinals), chosen to maximise
information gain; ties go to the lowest column index, then the lowest
threshold.  Growth stops at pure nodes, non-positive gain, or the minimum
leaf size.  With ``trials`` > 1 the tree is boosted with the SAMME
multi-class weighting; class probabilities are the boost-weight-normalised
mix of leaf class distributions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import N_CLASSES, ModelError

_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class TreeParams:
    trials: int = 3
    min_leaf: int = 1
    criterion: str = "entropy"

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ModelError(f"trials must be >= 1, got {self.trials}")
        if self.min_leaf < 1:
            raise ModelError(f"min_leaf must be >= 1, got {self.min_leaf}")
        if self.criterion != "entropy":
            raise ModelError(f"unsupported criterion '{self.criterion}'")


def _class_weights(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    out = np.zeros(N_CLASSES)
    for c in range(N_CLASSES):
        out[c] = w[y == c].sum()
    return out


def entropy(class_weights: np.ndarray) -> float:
    """Shannon entropy (bits) of a weighted class distribution."""
    total = class_weights.sum()
    if total <= 0.0:
        return 0.0
    p = class_weights[class_weights > 0] / total
    return float(-(p * np.log2(p)).sum())


def best_split(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int = 1
) -> tuple[float, int, float] | None:
    """Maximum-information-gain split as (gain, column, threshold), or None.

    Within ``_GAIN_EPS`` of the best gain counts as a tie and keeps the
    earlier (lower column, lower threshold) candidate.  A zero-gain split is
    still returned when one exists: an impure node may need it (a parity
    label over two features is invisible to any single split), and recursion
    terminates because both sides strictly shrink.
    """
    parent = entropy(_class_weights(y, w))
    total = w.sum()
    best: tuple[float, int, float] | None = None
    for j in range(X.shape[1]):
        col = X[:, j]
        values = np.unique(col)
        if len(values) < 2:
            continue
        for thr in (values[:-1] + values[1:]) / 2.0:
            mask = col <= thr
            n_left = int(mask.sum())
            if n_left < min_leaf or len(y) - n_left < min_leaf:
                continue
            w_left, w_right = w[mask], w[~mask]
            child = (
                w_left.sum() * entropy(_class_weights(y[mask], w_left))
                + w_right.sum() * entropy(_class_weights(y[~mask], w_right))
            ) / total
            gain = parent - child
            if best is None or gain > best[0] + _GAIN_EPS:
                best = (gain, j, float(thr))
    return best


class _Node:
    __slots__ = ("column", "threshold", "left", "right", "dist")

    def __init__(self, column=None, threshold=None, left=None, right=None, dist=None):
        self.column = column
        self.threshold = threshold
        self.left = left
        self.right = right
        self.dist = dist  # leaf class distribution

    @property
    def is_leaf(self) -> bool:
        return self.dist is not None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"dist": [float(x) for x in self.dist]}
        return {
            "column": self.column,
            "threshold": self.threshold,
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "_Node":
        if "dist" in d:
            return cls(dist=np.array(d["dist"], dtype=np.float64))
        return cls(
            column=int(d["column"]),
            threshold=float(d["threshold"]),
            left=cls.from_dict(d["left"]),
            right=cls.from_dict(d["right"]),
        )


def _leaf(y: np.ndarray, w: np.ndarray) -> _Node:
    cw = _class_weights(y, w)
    total = cw.sum()
    dist = cw / total if total > 0 else np.full(N_CLASSES, 1.0 / N_CLASSES)
    return _Node(dist=dist)


def grow_tree(X: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int = 1) -> _Node:
    if len(np.unique(y)) == 1:
        return _leaf(y, w)
    split = best_split(X, y, w, min_leaf)
    if split is None:
        return _leaf(y, w)
    _, column, threshold = split
    mask = X[:, column] <= threshold
    return _Node(
        column=column,
        threshold=threshold,
        left=grow_tree(X[mask], y[mask], w[mask], min_leaf),
        right=grow_tree(X[~mask], y[~mask], w[~mask], min_leaf),
    )


def _tree_dists(node: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty((len(X), N_CLASSES), dtype=np.float64)
    idx = np.arange(len(X))
    stack = [(node, idx)]
    while stack:
        nd, rows = stack.pop()
        if len(rows) == 0:
            continue
        if nd.is_leaf:
            out[rows] = nd.dist
            continue
        mask = X[rows, nd.column] <= nd.threshold
        stack.append((nd.left, rows[mask]))
        stack.append((nd.right, rows[~mask]))
    return out


class BoostedTreeModel:
    name = "tree"
    params_cls = TreeParams

    def __init__(self, trees: list[tuple[_Node, float]]):
        self.trees = trees

    @classmethod
    def train(cls, X, y, hp: TreeParams, groups=None) -> "BoostedTreeModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(y) == 0:
            raise ModelError("empty training table")
        n = len(y)
        w = np.full(n, 1.0 / n)
        trees: list[tuple[_Node, float]] = []
        for _ in range(hp.trials):
            tree = grow_tree(X, y, w, hp.min_leaf)
            pred = np.argmax(_tree_dists(tree, X), axis=1)
            miss = pred != y
            err = float(w[miss].sum() / w.sum())
            if err < 1e-10:
                trees.append((tree, 1.0))
                break
            if err >= 1.0 - 1.0 / N_CLASSES:
                # weak learner no better than chance; SAMME weight would be <= 0
                if not trees:
                    trees.append((tree, 1.0))
                break
            alpha = float(np.log((1.0 - err) / err) + np.log(N_CLASSES - 1.0))
            trees.append((tree, alpha))
            w = w * np.exp(alpha * miss)
            w = w / w.sum()
        return cls(trees)

    def predict_proba(self, X, groups=None) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        total = sum(alpha for _, alpha in self.trees)
        probs = np.zeros((len(X), N_CLASSES), dtype=np.float64)
        for tree, alpha in self.trees:
            probs += alpha * _tree_dists(tree, X)
        return probs / total

    def to_params(self) -> dict:
        return {"trees": [{"alpha": a, "root": t.to_dict()} for t, a in self.trees]}

    @classmethod
    def from_params(cls, params: dict) -> "BoostedTreeModel":
        return cls(
            [(_Node.from_dict(t["root"]), float(t["alpha"])) for t in params["trees"]]
        )
