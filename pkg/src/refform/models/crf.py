"""Linear-chain conditional random field over the three form labels.

Unary potentials are linear in the encoded features; one 3x3 matrix scores
adjacent label transitions.  Training maximises the L2-regularised sequence
log-likelihood by stochastic gradient descent over document sequences, with
gradients from the forward-backward recursions; decoding is Viterbi and the
reported class probabilities are the per-position marginals.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import N_CLASSES, ModelError, one_hot

logger = logging.getLogger(__name__)


def logsumexp(a: np.ndarray, axis=None):
    """Stable log-sum-exp; lighter than the scipy version on 3-wide arrays."""
    if axis is None:
        m = float(np.max(a))
        return m + float(np.log(np.exp(a - m).sum()))
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


@dataclass(frozen=True)
class CrfParams:
    iterations: int = 3000
    lr: float = 0.1
    l2: float = 1e-4
    seed: int = 0
    method: str = "l2sgd"

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ModelError(f"iterations must be >= 1, got {self.iterations}")
        if self.lr <= 0:
            raise ModelError(f"lr must be > 0, got {self.lr}")
        if self.l2 < 0:
            raise ModelError(f"l2 must be >= 0, got {self.l2}")
        if self.method != "l2sgd":
            raise ModelError(f"unsupported method '{self.method}'")


def forward_log_partition(unary: np.ndarray, trans: np.ndarray) -> float:
    """Log partition function via the forward recursion."""
    alpha = unary[0].copy()
    for t in range(1, len(unary)):
        alpha = unary[t] + logsumexp(alpha[:, None] + trans, axis=0)
    return float(logsumexp(alpha))


def backward_log_partition(unary: np.ndarray, trans: np.ndarray) -> float:
    """Log partition function via the backward recursion."""
    beta = np.zeros(N_CLASSES)
    for t in range(len(unary) - 2, -1, -1):
        beta = logsumexp(trans + unary[t + 1][None, :] + beta[None, :], axis=1)
    return float(logsumexp(unary[0] + beta))


def marginals(unary: np.ndarray, trans: np.ndarray):
    """Per-position and per-edge marginals plus the log partition value."""
    T = len(unary)
    log_alpha = np.empty((T, N_CLASSES))
    log_alpha[0] = unary[0]
    for t in range(1, T):
        log_alpha[t] = unary[t] + logsumexp(log_alpha[t - 1][:, None] + trans, axis=0)
    log_beta = np.zeros((T, N_CLASSES))
    for t in range(T - 2, -1, -1):
        log_beta[t] = logsumexp(
            trans + unary[t + 1][None, :] + log_beta[t + 1][None, :], axis=1
        )
    log_z = float(logsumexp(log_alpha[-1]))
    node = np.exp(log_alpha + log_beta - log_z)
    edge = np.empty((max(T - 1, 0), N_CLASSES, N_CLASSES))
    for t in range(T - 1):
        edge[t] = np.exp(
            log_alpha[t][:, None]
            + trans
            + unary[t + 1][None, :]
            + log_beta[t + 1][None, :]
            - log_z
        )
    return node, edge, log_z


def viterbi(unary: np.ndarray, trans: np.ndarray) -> list[int]:
    """Best label path; score ties resolve to the lower (canonical) label."""
    T = len(unary)
    delta = unary[0].copy()
    back = np.zeros((T, N_CLASSES), dtype=np.int64)
    for t in range(1, T):
        scores = delta[:, None] + trans
        back[t] = np.argmax(scores, axis=0)
        delta = unary[t] + scores[back[t], np.arange(N_CLASSES)]
    path = [int(np.argmax(delta))]
    for t in range(T - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    return path[::-1]


class CrfModel:
    name = "crf"
    params_cls = CrfParams

    def __init__(self, W: np.ndarray, b: np.ndarray, trans: np.ndarray):
        self.W = np.asarray(W, dtype=np.float64)
        self.b = np.asarray(b, dtype=np.float64)
        self.trans = np.asarray(trans, dtype=np.float64)

    def unary(self, X: np.ndarray) -> np.ndarray:
        return X @ self.W + self.b

    @classmethod
    def train(cls, X, y, hp: CrfParams, groups: Sequence[slice] | None = None) -> "CrfModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if groups is None:
            groups = [slice(0, len(y))]
        sequences = []
        for sl in groups:
            if sl.stop - sl.start == 0:
                logger.warning("skipping empty sequence at rows %s", sl)
                continue
            sequences.append((X[sl], y[sl]))
        if not sequences:
            raise ModelError("no non-empty training sequences")
        model = cls(
            np.zeros((X.shape[1], N_CLASSES)),
            np.zeros(N_CLASSES),
            np.zeros((N_CLASSES, N_CLASSES)),
        )
        rng = np.random.RandomState(hp.seed)
        n_seq = len(sequences)
        reg = hp.l2 / n_seq  # spread the penalty over one epoch of updates
        for _ in range(hp.iterations):
            for si in rng.permutation(n_seq):
                Xs, ys = sequences[si]
                unary = model.unary(Xs)
                node, edge, _ = marginals(unary, model.trans)
                gold = one_hot(ys)
                delta_u = gold - node
                grad_W = Xs.T @ delta_u - reg * model.W
                grad_b = delta_u.sum(axis=0)
                grad_T = -reg * model.trans
                if len(ys) > 1:
                    pair_counts = np.zeros((N_CLASSES, N_CLASSES))
                    for a, c in zip(ys[:-1], ys[1:]):
                        pair_counts[a, c] += 1.0
                    grad_T = grad_T + pair_counts - edge.sum(axis=0)
                model.W += hp.lr * grad_W
                model.b += hp.lr * grad_b
                model.trans += hp.lr * grad_T
        if not (np.isfinite(model.W).all() and np.isfinite(model.trans).all()):
            raise ModelError("training diverged; use a smaller learning rate")
        return model

    def predict_proba(self, X, groups: Sequence[slice] | None = None) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if groups is None:
            groups = [slice(0, len(X))]
        probs = np.empty((len(X), N_CLASSES), dtype=np.float64)
        for sl in groups:
            if sl.stop - sl.start == 0:
                continue
            node, _, _ = marginals(self.unary(X[sl]), self.trans)
            probs[sl] = node
        return probs

    def predict_paths(self, X, groups: Sequence[slice]) -> np.ndarray:
        """Viterbi label index per row."""
        X = np.asarray(X, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        for sl in groups:
            if sl.stop - sl.start == 0:
                continue
            out[sl] = viterbi(self.unary(X[sl]), self.trans)
        return out

    def to_params(self) -> dict:
        return {
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "trans": self.trans.tolist(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "CrfModel":
        return cls(
            np.array(params["W"]), np.array(params["b"]), np.array(params["trans"])
        )
