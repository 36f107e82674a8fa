"""Classifier layer: a uniform train/predict contract over six algorithms.

Every algorithm trains on an encoded :class:`~refform.features.FeatureTable`
and predicts per-class probabilities in canonical label order; trained models
serialise to a versioned JSON document.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any, Mapping

from ..features import FeatureConfig, FeatureTable, encode
from .base import ModelError, Prediction, TrainedModel, config_for_table
from .crf import CrfModel, CrfParams
from .gbt import GbtModel, GbtParams
from .knn import KnnModel, KnnParams
from .maxent import MaxEntModel, MaxEntParams
from .mlp import MlpModel, MlpParams
from .tree import BoostedTreeModel, TreeParams

MODEL_FORMAT_VERSION = 1

ALGORITHMS: Mapping[str, type] = {
    cls.name: cls
    for cls in (KnnModel, BoostedTreeModel, MaxEntModel, MlpModel, CrfModel, GbtModel)
}


def make_hyperparams(algorithm: str, overrides: Mapping[str, Any] | None = None):
    """Instantiate an algorithm's hyperparameter record with overrides."""
    if algorithm not in ALGORITHMS:
        raise ModelError(
            f"unknown algorithm '{algorithm}'; expected one of {sorted(ALGORITHMS)}"
        )
    params_cls = ALGORITHMS[algorithm].params_cls
    overrides = dict(overrides or {})
    valid = set(params_cls.__dataclass_fields__)
    unknown = sorted(set(overrides) - valid)
    if unknown:
        raise ModelError(
            f"unknown hyperparameters for {algorithm}: {', '.join(unknown)}"
        )
    if "hidden" in overrides and isinstance(overrides["hidden"], list):
        overrides["hidden"] = tuple(overrides["hidden"])
    return params_cls(**overrides)


def train_model(
    table: FeatureTable,
    algorithm: str,
    hyperparams=None,
    feature_config: FeatureConfig | None = None,
) -> TrainedModel:
    """Train ``algorithm`` on a feature table under the uniform contract."""
    if algorithm not in ALGORITHMS:
        raise ModelError(
            f"unknown algorithm '{algorithm}'; expected one of {sorted(ALGORITHMS)}"
        )
    cls = ALGORITHMS[algorithm]
    if hyperparams is None:
        hyperparams = cls.params_cls()
    elif isinstance(hyperparams, Mapping):
        hyperparams = make_hyperparams(algorithm, hyperparams)
    X, y, column_map = encode(table)
    groups = [sl for _, sl in table.document_groups()]
    impl = cls.train(X, y, hyperparams, groups=groups)
    return TrainedModel(
        algorithm=algorithm,
        impl=impl,
        hyperparams=hyperparams,
        column_map=tuple(column_map),
        feature_config=feature_config or config_for_table(table),
    )


def predict_model(model: TrainedModel, table: FeatureTable) -> list[Prediction]:
    return model.predict_table(table)


def train_knn(table, hp: KnnParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "knn", hp, **kw)


def train_tree(table, hp: TreeParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "tree", hp, **kw)


def train_maxent(table, hp: MaxEntParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "maxent", hp, **kw)


def train_mlp(table, hp: MlpParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "mlp", hp, **kw)


def train_crf(table, hp: CrfParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "crf", hp, **kw)


def train_gbt(table, hp: GbtParams | None = None, **kw) -> TrainedModel:
    return train_model(table, "gbt", hp, **kw)


def model_to_dict(model: TrainedModel) -> dict:
    hp = asdict(model.hyperparams)
    if "hidden" in hp:
        hp["hidden"] = list(hp["hidden"])
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "algorithm": model.algorithm,
        "hyperparams": hp,
        "column_map": list(model.column_map),
        "feature_config": {
            "system_name": model.feature_config.system_name,
            "features": list(model.feature_config.features),
            "subsequent_only": model.feature_config.subsequent_only,
            "clamps": dict(model.feature_config.clamps),
        },
        "seed": model.seed,
        "params": model.impl.to_params(),
    }


def model_from_dict(data: Mapping) -> TrainedModel:
    version = data.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version!r}")
    algorithm = data["algorithm"]
    if algorithm not in ALGORITHMS:
        raise ModelError(f"unknown algorithm '{algorithm}' in model file")
    cls = ALGORITHMS[algorithm]
    fc = data["feature_config"]
    return TrainedModel(
        algorithm=algorithm,
        impl=cls.from_params(data["params"]),
        hyperparams=make_hyperparams(algorithm, data["hyperparams"]),
        column_map=tuple(data["column_map"]),
        feature_config=FeatureConfig(
            system_name=fc["system_name"],
            features=tuple(fc["features"]),
            subsequent_only=bool(fc["subsequent_only"]),
            clamps=dict(fc["clamps"]),
        ),
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(model_to_dict(model), sort_keys=True) + "\n", encoding="utf-8"
    )


def load_model(path: str | Path) -> TrainedModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


__all__ = [
    "ALGORITHMS",
    "BoostedTreeModel",
    "CrfModel",
    "CrfParams",
    "GbtModel",
    "GbtParams",
    "KnnModel",
    "KnnParams",
    "MaxEntModel",
    "MaxEntParams",
    "MlpModel",
    "MlpParams",
    "ModelError",
    "Prediction",
    "TrainedModel",
    "TreeParams",
    "load_model",
    "make_hyperparams",
    "model_from_dict",
    "model_to_dict",
    "predict_model",
    "save_model",
    "train_crf",
    "train_gbt",
    "train_knn",
    "train_maxent",
    "train_mlp",
    "train_model",
    "train_tree",
]
