"""Bundled reference fixtures.

``benchmark_scores.csv`` holds the published overall scores (accuracy,
macro-F1, weighted-F1, in percent) of seven reference-selection systems on
the msr, neg, and wsj corpora together with each corpus's test-set size;
``benchmark_per_class.csv`` holds the matching per-class precision/recall/F1
rows.  They let the comparison and consistency suites run without any
licensed corpus data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path

MODELS = ("UDel", "ICSI", "CNTS", "OSU", "IS-G", "BERT", "RoBERTa")
CORPORA = ("msr", "neg", "wsj")
METRIC_NAMES = ("accuracy", "macro_f1", "weighted_f1")


def data_path(name: str) -> Path:
    return Path(str(files("refform").joinpath("data", name)))


def system_config_path(name: str) -> Path:
    return data_path(f"systems/{name}.cfg")


@dataclass(frozen=True)
class ScoreRow:
    model: str
    corpus: str
    n_test: int
    accuracy: float  # fractions in [0, 1]
    macro_f1: float
    weighted_f1: float

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class PerClassRow:
    model: str
    corpus: str
    label: str
    precision: float
    recall: float
    f1: float


def read_score_csv(path: str | Path) -> list[ScoreRow]:
    """Read a score table CSV (percent values) into fraction rows."""
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for record in csv.DictReader(fh):
            rows.append(
                ScoreRow(
                    model=record["model"],
                    corpus=record["corpus"],
                    n_test=int(record["n_test"]),
                    accuracy=float(record["accuracy"]) / 100.0,
                    macro_f1=float(record["macro_f1"]) / 100.0,
                    weighted_f1=float(record["weighted_f1"]) / 100.0,
                )
            )
    if not rows:
        raise ValueError(f"{path}: empty score table")
    return rows


def load_benchmark_scores() -> list[ScoreRow]:
    return read_score_csv(data_path("benchmark_scores.csv"))


def load_benchmark_per_class() -> list[PerClassRow]:
    rows = []
    with open(data_path("benchmark_per_class.csv"), encoding="utf-8", newline="") as fh:
        for record in csv.DictReader(fh):
            rows.append(
                PerClassRow(
                    model=record["model"],
                    corpus=record["corpus"],
                    label=record["label"],
                    precision=float(record["precision"]) / 100.0,
                    recall=float(record["recall"]) / 100.0,
                    f1=float(record["f1"]) / 100.0,
                )
            )
    return rows
