"""Evaluation metrics for referential-form predictions.

Produces accuracy, macro-averaged F1, support-weighted F1, and per-class
precision/recall/F1 from the 3x3 confusion matrix.  Any 0/0 quotient is
defined as 0, and macro-F1 always averages over the fixed 3-label set even
when a label is absent from the data, so scores stay comparable across
corpora.  Values are fractions in [0, 1]; reports print them as percentages
with two decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import CLASS_FORMS, FORM_INDEX, Corpus, RefForm
from .models.base import Prediction


class EvaluationError(ValueError):
    """Predictions do not join 1:1 with the gold mentions."""


def f1_score(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassReport:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    weighted_f1: float
    per_class: Mapping[str, ClassReport]
    n: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "per_class": {
                label: {
                    "precision": report.precision,
                    "recall": report.recall,
                    "f1": report.f1,
                    "support": report.support,
                }
                for label, report in self.per_class.items()
            },
            "n": self.n,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def format_table(self) -> str:
        """Aligned plain-text table, percentages to two decimals."""
        lines = [
            f"{'':14s}{'P':>8s}{'R':>8s}{'F1':>8s}{'support':>9s}",
        ]
        for label, rep in self.per_class.items():
            lines.append(
                f"{label:14s}{100 * rep.precision:8.2f}{100 * rep.recall:8.2f}"
                f"{100 * rep.f1:8.2f}{rep.support:9d}"
            )
        lines.append("")
        lines.append(
            f"accuracy {100 * self.accuracy:.2f}  "
            f"macro-F1 {100 * self.macro_f1:.2f}  "
            f"weighted-F1 {100 * self.weighted_f1:.2f}  "
            f"n {self.n}"
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "EvalReport":
        return cls(
            accuracy=float(data["accuracy"]),
            macro_f1=float(data["macro_f1"]),
            weighted_f1=float(data["weighted_f1"]),
            per_class={
                label: ClassReport(
                    precision=float(rep["precision"]),
                    recall=float(rep["recall"]),
                    f1=float(rep["f1"]),
                    support=int(rep["support"]),
                )
                for label, rep in data["per_class"].items()
            },
            n=int(data["n"]),
        )


def gold_from_corpus(corpus: Corpus, subsequent_only: bool = False) -> dict:
    """Map (doc_id, mention_id) to the gold form for every retained mention."""
    gold: dict[tuple[str, str], RefForm] = {}
    for doc in corpus.documents:
        seen: set[str] = set()
        for mention in doc.mentions:
            first = mention.chain_id not in seen
            seen.add(mention.chain_id)
            if subsequent_only and first:
                continue
            gold[(doc.doc_id, mention.mention_id)] = mention.form
    return gold


def _join(
    predictions: Iterable[Prediction], gold: Mapping[tuple[str, str], RefForm]
) -> list[tuple[int, int]]:
    """Pairs of (gold index, predicted index); errors list the mention_ids."""
    pairs: dict[tuple[str, str], int] = {}
    duplicates = []
    unmatched = []
    for pred in predictions:
        key = (pred.doc_id, pred.mention_id)
        if key in pairs:
            duplicates.append(key)
        elif key not in gold:
            unmatched.append(key)
        else:
            pairs[key] = FORM_INDEX[pred.predicted]
    missing = [key for key in gold if key not in pairs]
    problems = []
    for name, keys in (
        ("duplicate", duplicates),
        ("unmatched", unmatched),
        ("missing", missing),
    ):
        if keys:
            listed = ", ".join(f"{d}/{m}" for d, m in sorted(keys)[:10])
            more = "" if len(keys) <= 10 else f" (+{len(keys) - 10} more)"
            problems.append(f"{name} predictions for mentions: {listed}{more}")
    if problems:
        raise EvaluationError("; ".join(problems))
    return [(FORM_INDEX[gold[key]], pairs[key]) for key in gold]


def confusion_matrix(
    predictions: Iterable[Prediction], gold: Mapping[tuple[str, str], RefForm]
) -> np.ndarray:
    """3x3 counts, rows gold and columns predicted, in canonical order."""
    pairs = _join(predictions, gold)
    matrix = np.zeros((len(CLASS_FORMS), len(CLASS_FORMS)), dtype=np.int64)
    for g, p in pairs:
        matrix[g, p] += 1
    return matrix


def report_from_confusion(matrix: np.ndarray) -> EvalReport:
    matrix = np.asarray(matrix)
    n = int(matrix.sum())
    per_class = {}
    f1s = []
    supports = []
    for i, form in enumerate(CLASS_FORMS):
        tp = float(matrix[i, i])
        support = int(matrix[i].sum())
        predicted = float(matrix[:, i].sum())
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / support if support > 0 else 0.0
        f1 = f1_score(precision, recall)
        per_class[form.value] = ClassReport(precision, recall, f1, support)
        f1s.append(f1)
        supports.append(support)
    accuracy = float(np.trace(matrix)) / n if n else 0.0
    weighted = (
        float(np.dot(f1s, supports)) / sum(supports) if sum(supports) else 0.0
    )
    return EvalReport(
        accuracy=accuracy,
        macro_f1=float(np.mean(f1s)),
        weighted_f1=weighted,
        per_class=per_class,
        n=n,
    )


def evaluate(
    predictions: Iterable[Prediction], gold: Mapping[tuple[str, str], RefForm]
) -> EvalReport:
    """Score predictions against gold; the join must be exactly 1:1."""
    return report_from_confusion(confusion_matrix(predictions, gold))


@dataclass(frozen=True)
class Ranking:
    """Models ordered by a metric, ties sharing a rank."""

    metric: str
    entries: tuple[tuple[int, str, float], ...]  # (rank, model, score)

    def render(self) -> str:
        """Chain notation, e.g. ``A = B > C``."""
        parts = []
        for i, (rank, model, _) in enumerate(self.entries):
            if i == 0:
                parts.append(model)
            elif rank == self.entries[i - 1][0]:
                parts.append(f"= {model}")
            else:
                parts.append(f"> {model}")
        return " ".join(parts)


def rank_models(
    scores: Sequence[tuple[str, float]] | Mapping[str, float], metric: str
) -> Ranking:
    """Dense ranking by descending score; exact ties share a rank.

    Tied models keep their input order in the rendered chain.
    """
    items = list(scores.items()) if isinstance(scores, Mapping) else list(scores)
    if len(items) < 2:
        raise EvaluationError("ranking needs at least 2 models")
    ordered = sorted(
        range(len(items)), key=lambda i: (-items[i][1], i)
    )
    entries = []
    rank = 0
    previous: float | None = None
    for i in ordered:
        model, score = items[i]
        if previous is None or score != previous:
            rank += 1
            previous = score
        entries.append((rank, model, float(score)))
    return Ranking(metric=metric, entries=tuple(entries))
