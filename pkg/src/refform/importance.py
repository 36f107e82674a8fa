"""Permutation variable importance and cross-corpus ranking comparison.

Importance of a feature is the drop in an evaluation metric when that
feature's values are shuffled: all columns belonging to one registry feature
(the whole one-hot block of a categorical) move together under one seeded
permutation per repeat, so importance is reported per feature, not per
column.  A feature the model never consults scores exactly zero because the
predictions cannot change.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import CLASS_FORMS
from .evaluation import report_from_confusion
from .features import FeatureTable, encode
from .models.base import ModelError, TrainedModel

METRICS = ("accuracy", "macro_f1")


class ImportanceError(ValueError):
    """Invalid importance-analysis input."""


@dataclass(frozen=True)
class ImportanceRanking:
    """Features ordered by descending mean importance."""

    entries: tuple[tuple[str, float, tuple[float, ...]], ...]
    metric: str
    n_repeats: int
    seed: int
    baseline: float

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in self.entries)

    def to_csv(self) -> str:
        header = ["feature", "mean"] + [
            f"repeat_{i + 1}" for i in range(self.n_repeats)
        ]
        lines = [",".join(header)]
        for name, mean, repeats in self.entries:
            cells = [name, repr(mean)] + [repr(v) for v in repeats]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_long_csv(self) -> str:
        """Long format (feature, repeat, importance) for external charting."""
        lines = ["feature,repeat,importance"]
        for name, _, repeats in self.entries:
            for i, value in enumerate(repeats, start=1):
                lines.append(f"{name},{i},{value!r}")
        return "\n".join(lines) + "\n"


def _metric_value(metric: str, y_true: np.ndarray, y_pred: np.ndarray) -> float:
    matrix = np.zeros((len(CLASS_FORMS), len(CLASS_FORMS)), dtype=np.int64)
    for g, p in zip(y_true, y_pred):
        matrix[g, p] += 1
    report = report_from_confusion(matrix)
    return report.accuracy if metric == "accuracy" else report.macro_f1


def _feature_columns(feature: str, column_map: Sequence[str]) -> list[int]:
    cols = [
        i
        for i, name in enumerate(column_map)
        if name == feature or name.startswith(f"{feature}=")
    ]
    if not cols:
        raise ImportanceError(f"feature '{feature}' has no encoded columns")
    return cols


def permutation_importance(
    model: TrainedModel,
    table: FeatureTable,
    metric: str = "macro_f1",
    n_repeats: int = 10,
    seed: int = 0,
) -> ImportanceRanking:
    """Mean metric drop per feature over ``n_repeats`` seeded permutations."""
    if metric not in METRICS:
        raise ImportanceError(f"metric must be one of {METRICS}, got '{metric}'")
    if n_repeats < 1:
        raise ImportanceError(f"n_repeats must be >= 1, got {n_repeats}")
    X, y, column_map = encode(table)
    if tuple(column_map) != tuple(model.column_map):
        raise ModelError(
            "feature columns do not match the model's training columns"
        )
    groups = [sl for _, sl in table.document_groups()]
    features = list(model.feature_config.features)
    columns = {f: _feature_columns(f, column_map) for f in features}

    def predict_labels(matrix: np.ndarray) -> np.ndarray:
        return np.argmax(model.predict_proba(matrix, groups=groups), axis=1)

    baseline = _metric_value(metric, y, predict_labels(X))
    drops = {f: [] for f in features}
    rng = np.random.RandomState(seed)
    for _ in range(n_repeats):
        perm = rng.permutation(len(y))
        for feature in features:
            cols = columns[feature]
            permuted = X.copy()
            permuted[:, cols] = X[np.ix_(perm, cols)]
            drops[feature].append(
                baseline - _metric_value(metric, y, predict_labels(permuted))
            )
    entries = tuple(
        sorted(
            (
                (f, float(np.mean(drops[f])), tuple(drops[f]))
                for f in features
            ),
            key=lambda e: -e[1],
        )
    )
    return ImportanceRanking(
        entries=entries,
        metric=metric,
        n_repeats=n_repeats,
        seed=seed,
        baseline=baseline,
    )


@dataclass(frozen=True)
class ImportanceComparison:
    """Aligned feature ranks across several rankings plus top-k overlaps."""

    names: tuple[str, ...]
    features: tuple[str, ...]  # ordered by mean rank across rankings
    ranks: dict[str, tuple[int, ...]]  # feature -> rank per ranking (1-based)
    overlap: tuple[tuple[int, int], ...]  # (k, |intersection of top-k sets|)

    def ranks_csv(self) -> str:
        header = ["feature"] + [f"rank_{name}" for name in self.names]
        lines = [",".join(header)]
        for feature in self.features:
            lines.append(
                ",".join([feature] + [str(r) for r in self.ranks[feature]])
            )
        return "\n".join(lines) + "\n"

    def overlap_csv(self) -> str:
        lines = ["k,top_k_intersection"]
        for k, size in self.overlap:
            lines.append(f"{k},{size}")
        return "\n".join(lines) + "\n"


def importance_report(
    rankings: Sequence[tuple[str, ImportanceRanking]]
) -> ImportanceComparison:
    """Compare >= 2 importance rankings over one shared feature set."""
    if len(rankings) < 2:
        raise ImportanceError("need at least 2 rankings to compare")
    names = tuple(name for name, _ in rankings)
    if len(set(names)) != len(names):
        raise ImportanceError("ranking names must be unique")
    feature_set = set(rankings[0][1].features)
    for name, ranking in rankings[1:]:
        if set(ranking.features) != feature_set:
            raise ImportanceError(
                f"ranking '{name}' covers a different feature set"
            )
    rank_of = {
        name: {f: i + 1 for i, f in enumerate(ranking.features)}
        for name, ranking in rankings
    }
    features = sorted(
        feature_set,
        key=lambda f: (sum(rank_of[name][f] for name in names), f),
    )
    ranks = {
        f: tuple(rank_of[name][f] for name in names) for f in features
    }
    overlap = []
    for k in range(1, len(features) + 1):
        top_sets = [
            set(ranking.features[:k]) for _, ranking in rankings
        ]
        common = set.intersection(*top_sets)
        overlap.append((k, len(common)))
    return ImportanceComparison(
        names=names,
        features=tuple(features),
        ranks=ranks,
        overlap=tuple(overlap),
    )
