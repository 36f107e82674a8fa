"""The tab-separated prediction interchange file.

Columns: doc_id, mention_id, gold, predicted, p_description, p_name,
p_pronoun.  Probabilities are printed to six decimals and must sum to 1
within 1e-4 per row.  This file is the bridge between any predictor
(including external ones) and the evaluation verb.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping

from .corpus import CLASS_FORMS, RefForm
from .models.base import Prediction

HEADER = (
    "doc_id", "mention_id", "gold", "predicted",
    "p_description", "p_name", "p_pronoun",
)

_FORM_BY_LABEL = {form.value: form for form in CLASS_FORMS}


class PredictionFileError(ValueError):
    """Malformed prediction interchange file."""


def predictions_to_tsv(
    predictions: Iterable[Prediction], gold: Mapping[tuple[str, str], RefForm]
) -> str:
    lines = ["\t".join(HEADER)]
    for pred in predictions:
        key = (pred.doc_id, pred.mention_id)
        if key not in gold:
            raise PredictionFileError(
                f"no gold label for mention {pred.doc_id}/{pred.mention_id}"
            )
        lines.append(
            "\t".join(
                [
                    pred.doc_id,
                    pred.mention_id,
                    gold[key].value,
                    pred.predicted.value,
                    *(f"{p:.6f}" for p in pred.probs),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def read_prediction_file(
    path: str | Path,
) -> tuple[list[Prediction], dict[tuple[str, str], RefForm]]:
    """Parse and validate a prediction file; returns (predictions, gold)."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    lines = [line for line in lines if line]
    if not lines or tuple(lines[0].split("\t")) != HEADER:
        raise PredictionFileError(
            f"{path}: expected header {' '.join(HEADER)}"
        )
    predictions: list[Prediction] = []
    gold: dict[tuple[str, str], RefForm] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(HEADER):
            raise PredictionFileError(
                f"{path}:{lineno}: expected {len(HEADER)} columns, got {len(cells)}"
            )
        doc_id, mention_id, gold_label, predicted_label, *prob_cells = cells
        for label in (gold_label, predicted_label):
            if label not in _FORM_BY_LABEL:
                raise PredictionFileError(
                    f"{path}:{lineno}: unknown form label '{label}'"
                )
        try:
            probs = tuple(float(c) for c in prob_cells)
        except ValueError:
            raise PredictionFileError(
                f"{path}:{lineno}: non-numeric probability"
            ) from None
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-4:
            raise PredictionFileError(
                f"{path}:{lineno}: probabilities must be non-negative and "
                f"sum to 1 within 1e-4, got {probs}"
            )
        key = (doc_id, mention_id)
        if key in gold:
            raise PredictionFileError(
                f"{path}:{lineno}: duplicate row for mention {doc_id}/{mention_id}"
            )
        gold[key] = _FORM_BY_LABEL[gold_label]
        predictions.append(
            Prediction(
                doc_id=doc_id,
                mention_id=mention_id,
                predicted=_FORM_BY_LABEL[predicted_label],
                probs=probs,  # type: ignore[arg-type]
            )
        )
    return predictions, gold
