"""Shared pieces of the classifier layer: the prediction record, the trained
model wrapper, and small numeric helpers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..corpus import CLASS_FORMS, RefForm
from ..features import FeatureConfig, FeatureKind, FeatureTable, encode

N_CLASSES = len(CLASS_FORMS)


class ModelError(ValueError):
    """Invalid hyperparameters, inputs, or an incompatible model."""


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise stable softmax."""
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(y: np.ndarray, n_classes: int = N_CLASSES) -> np.ndarray:
    out = np.zeros((len(y), n_classes), dtype=np.float64)
    out[np.arange(len(y)), y] = 1.0
    return out


@dataclass(frozen=True)
class Prediction:
    """One per-mention prediction with class probabilities in canonical
    (description, name, pronoun) order."""

    doc_id: str
    mention_id: str
    predicted: RefForm
    probs: tuple[float, float, float]


def predictions_from_probs(
    table: FeatureTable, probs: np.ndarray
) -> list[Prediction]:
    """Pair probability rows with table rows; argmax ties break canonically."""
    preds = []
    for row, p in zip(table.rows, probs):
        preds.append(
            Prediction(
                doc_id=row.doc_id,
                mention_id=row.mention_id,
                predicted=CLASS_FORMS[int(np.argmax(p))],
                probs=(float(p[0]), float(p[1]), float(p[2])),
            )
        )
    return preds


def config_for_table(table: FeatureTable) -> FeatureConfig:
    """Reconstruct a feature config matching a table's specs."""
    clamps = {
        spec.name: spec.max_value
        for spec in table.specs
        if spec.kind is FeatureKind.ORDINAL
    }
    return FeatureConfig(
        system_name=table.system_name or "custom",
        features=table.feature_names,
        subsequent_only=False,
        clamps=clamps,
    )


@dataclass
class TrainedModel:
    """A trained classifier plus the feature space it was trained in.

    ``predict_table`` refuses feature tables whose encoded column map differs
    from the one seen at training time.
    """

    algorithm: str
    impl: Any
    hyperparams: Any
    column_map: tuple[str, ...]
    feature_config: FeatureConfig

    @property
    def seed(self) -> int | None:
        return getattr(self.hyperparams, "seed", None)

    def predict_proba(
        self, X: np.ndarray, groups: Sequence[slice] | None = None
    ) -> np.ndarray:
        return self.impl.predict_proba(X, groups=groups)

    def predict_table(self, table: FeatureTable) -> list[Prediction]:
        X, _, column_map = encode(table)
        if tuple(column_map) != tuple(self.column_map):
            raise ModelError(
                "feature columns do not match the model's training columns: "
                f"got {column_map}, expected {list(self.column_map)}"
            )
        groups = [sl for _, sl in table.document_groups()]
        probs = self.predict_proba(X, groups=groups)
        return predictions_from_probs(table, probs)
