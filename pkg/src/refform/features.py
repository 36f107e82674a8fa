"""Linguistic feature extraction for referential-form classifiers.

Features are declared in a registry; a :class:`FeatureConfig` selects a
subset of them (the reconstructed per-system feature sets ship as editable
config files under ``refform/data/systems/``).  Extraction yields a
:class:`FeatureTable` with one row per mention; :func:`encode` turns the
table into a numeric matrix with categorical values one-hot over their full
declared domain, so train/test column alignment never depends on which
values happen to be observed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import CLASS_FORMS, FORM_INDEX, Corpus, Document, Mention, RefForm


class FeatureError(ValueError):
    """Invalid feature configuration or extraction input."""


class FeatureKind(Enum):
    CATEGORICAL = "categorical"
    ORDINAL = "ordinal"
    BINARY = "binary"


@dataclass(frozen=True)
class FeatureSpec:
    """Declaration of one feature: its kind and value space."""

    name: str
    kind: FeatureKind
    domain: tuple[str, ...] = ()
    max_value: int = 1
    description: str = ""

    def __post_init__(self) -> None:
        if self.kind is FeatureKind.CATEGORICAL:
            if not self.domain:
                raise FeatureError(f"categorical feature '{self.name}' needs a domain")
            if len(set(self.domain)) != len(self.domain):
                raise FeatureError(f"duplicate domain values in '{self.name}'")
        if self.kind is FeatureKind.ORDINAL and self.max_value < 1:
            raise FeatureError(f"ordinal feature '{self.name}' needs max_value >= 1")

    @property
    def n_columns(self) -> int:
        return len(self.domain) if self.kind is FeatureKind.CATEGORICAL else 1

    def column_names(self) -> list[str]:
        if self.kind is FeatureKind.CATEGORICAL:
            return [f"{self.name}={value}" for value in self.domain]
        return [self.name]


#: Default clamp bounds for the ordinal features; override via FeatureConfig.
DEFAULT_CLAMPS: Mapping[str, int] = {
    "recency_tokens": 50,
    "chain_mention_index": 10,
    "competitors": 10,
}

#: Semantic categories encoded one-hot; anything else maps to "other".
SEM_CATEGORIES = ("human", "city", "country", "river", "mountain", "organization", "other")


def builtin_registry(clamps: Mapping[str, int] | None = None) -> dict[str, FeatureSpec]:
    """The built-in feature registry, keyed by name in canonical order."""
    c = dict(DEFAULT_CLAMPS)
    if clamps:
        unknown = sorted(set(clamps) - set(c))
        if unknown:
            raise FeatureError(f"clamps given for non-ordinal features: {unknown}")
        c.update(clamps)
    specs = [
        FeatureSpec(
            "gram_role", FeatureKind.CATEGORICAL,
            domain=("subject", "object", "determiner", "other"),
            description="grammatical role of the mention",
        ),
        FeatureSpec(
            "sem_category", FeatureKind.CATEGORICAL, domain=SEM_CATEGORIES,
            description="semantic category of the referent",
        ),
        FeatureSpec(
            "sent_distance_cat", FeatureKind.CATEGORICAL,
            domain=("first", "same", "previous", "far"),
            description="binned sentence distance to the nearest same-chain "
                        "antecedent: none / same sentence / one back / two or more",
        ),
        FeatureSpec(
            "first_mention", FeatureKind.BINARY,
            description="mention opens its coreference chain",
        ),
        FeatureSpec(
            "recency_tokens", FeatureKind.ORDINAL, max_value=c["recency_tokens"],
            description="tokens between the end of the antecedent and the start "
                        "of the mention, clamped; first mentions take the clamp",
        ),
        FeatureSpec(
            "prev_form", FeatureKind.CATEGORICAL,
            domain=("none", "description", "name", "pronoun"),
            description="form of the chain's previous mention",
        ),
        FeatureSpec(
            "par_initial", FeatureKind.BINARY,
            description="mention sits in the first sentence of a paragraph",
        ),
        FeatureSpec(
            "sent_initial", FeatureKind.BINARY,
            description="mention starts its sentence (token_start == 0)",
        ),
        FeatureSpec(
            "chain_mention_index", FeatureKind.ORDINAL,
            max_value=c["chain_mention_index"],
            description="0-based position of the mention within its chain, clamped",
        ),
        FeatureSpec(
            "competitors", FeatureKind.ORDINAL, max_value=c["competitors"],
            description="number of other chains mentioned in the same or the "
                        "previous sentence, clamped",
        ),
    ]
    return {spec.name: spec for spec in specs}


@dataclass(frozen=True)
class FeatureConfig:
    """Feature selection for one classifier system."""

    system_name: str
    features: tuple[str, ...]
    subsequent_only: bool = False
    clamps: Mapping[str, int] = field(default_factory=dict)

    def registry(self) -> dict[str, FeatureSpec]:
        return builtin_registry(self.clamps)

    def validate(self) -> None:
        registry = self.registry()
        unknown = [name for name in self.features if name not in registry]
        if unknown:
            raise FeatureError(f"unknown feature names: {', '.join(unknown)}")
        if not self.features:
            raise FeatureError("feature config selects no features")
        if len(set(self.features)) != len(self.features):
            raise FeatureError("feature config lists a feature twice")

    def selected_specs(self) -> tuple[FeatureSpec, ...]:
        self.validate()
        registry = self.registry()
        return tuple(registry[name] for name in self.features)


def read_feature_config(path: str | Path) -> FeatureConfig:
    """Read a plain-text ``key = value`` feature config file.

    Recognised keys: system_name, features (comma list), subsequent_only
    (true/false), clamps (``name:bound`` comma list).
    """
    values: dict[str, str] = {}
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise FeatureError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    unknown = sorted(set(values) - {"system_name", "features", "subsequent_only", "clamps"})
    if unknown:
        raise FeatureError(f"{path}: unknown config keys: {', '.join(unknown)}")
    if "features" not in values:
        raise FeatureError(f"{path}: missing 'features' key")
    clamps: dict[str, int] = {}
    if values.get("clamps"):
        for item in values["clamps"].split(","):
            name, _, bound = item.strip().partition(":")
            try:
                clamps[name.strip()] = int(bound)
            except ValueError:
                raise FeatureError(f"{path}: bad clamp entry '{item.strip()}'") from None
    config = FeatureConfig(
        system_name=values.get("system_name", path.stem),
        features=tuple(f.strip() for f in values["features"].split(",") if f.strip()),
        subsequent_only=values.get("subsequent_only", "false").lower() == "true",
        clamps=clamps,
    )
    config.validate()
    return config


def write_feature_config(config: FeatureConfig, path: str | Path) -> None:
    lines = [
        f"system_name = {config.system_name}",
        f"features = {', '.join(config.features)}",
        f"subsequent_only = {'true' if config.subsequent_only else 'false'}",
    ]
    if config.clamps:
        clamp_str = ", ".join(f"{k}:{v}" for k, v in sorted(config.clamps.items()))
        lines.append(f"clamps = {clamp_str}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class FeatureRow:
    doc_id: str
    mention_id: str
    gold: RefForm
    values: tuple


@dataclass(frozen=True)
class FeatureTable:
    """Per-mention feature values for one corpus and config.

    Rows are in corpus document order; rows of one document are contiguous,
    which is what the sequence models rely on.
    """

    specs: tuple[FeatureSpec, ...]
    rows: tuple[FeatureRow, ...]
    system_name: str = ""

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.specs)

    def column_map(self) -> list[str]:
        return [name for spec in self.specs for name in spec.column_names()]

    def document_groups(self) -> list[tuple[str, slice]]:
        """Contiguous row slices per document, in table order."""
        groups: list[tuple[str, slice]] = []
        start = 0
        for i, row in enumerate(self.rows):
            if row.doc_id != self.rows[start].doc_id:
                groups.append((self.rows[start].doc_id, slice(start, i)))
                start = i
        if self.rows:
            groups.append((self.rows[start].doc_id, slice(start, len(self.rows))))
        return groups


def _sentence_chain_map(doc: Document) -> dict[int, set[str]]:
    by_sentence: dict[int, set[str]] = {}
    for mention in doc.mentions:
        by_sentence.setdefault(mention.sent_index, set()).add(mention.chain_id)
    return by_sentence


def _document_rows(doc: Document, specs: Sequence[FeatureSpec]) -> list[FeatureRow]:
    chains: dict[str, list[Mention]] = {}
    for mention in doc.mentions:
        chains.setdefault(mention.chain_id, []).append(mention)
    antecedent: dict[str, Mention | None] = {}
    chain_pos: dict[str, int] = {}
    for chain in chains.values():
        for i, mention in enumerate(chain):
            antecedent[mention.mention_id] = chain[i - 1] if i > 0 else None
            chain_pos[mention.mention_id] = i
    by_sentence = _sentence_chain_map(doc)
    offsets = doc.sentence_token_offsets

    rows = []
    for mention in doc.mentions:
        if mention.form is RefForm.EMPTY:
            raise FeatureError(
                f"document '{doc.doc_id}': mention '{mention.mention_id}' has form "
                "'empty'; parse the corpus with include_empty=False before extraction"
            )
        ante = antecedent[mention.mention_id]
        values = []
        for spec in specs:
            values.append(_feature_value(spec, mention, ante, doc, chain_pos, by_sentence, offsets))
        rows.append(
            FeatureRow(doc.doc_id, mention.mention_id, mention.form, tuple(values))
        )
    return rows


def _feature_value(spec, mention, ante, doc, chain_pos, by_sentence, offsets):
    name = spec.name
    if name == "gram_role":
        return mention.gram_role.value
    if name == "sem_category":
        cat = mention.sem_category
        return cat if cat in spec.domain else "other"
    if name == "sent_distance_cat":
        if ante is None:
            return "first"
        delta = mention.sent_index - ante.sent_index
        return "same" if delta == 0 else "previous" if delta == 1 else "far"
    if name == "first_mention":
        return ante is None
    if name == "recency_tokens":
        if ante is None:
            return spec.max_value
        gap = (offsets[mention.sent_index] + mention.token_start) - (
            offsets[ante.sent_index] + ante.token_end
        )
        return min(max(gap, 0), spec.max_value)
    if name == "prev_form":
        return "none" if ante is None else ante.form.value
    if name == "par_initial":
        return mention.sent_index in doc.paragraph_initial_sentences
    if name == "sent_initial":
        return mention.token_start == 0
    if name == "chain_mention_index":
        return min(chain_pos[mention.mention_id], spec.max_value)
    if name == "competitors":
        here = by_sentence.get(mention.sent_index, set())
        prev = by_sentence.get(mention.sent_index - 1, set())
        others = (here | prev) - {mention.chain_id}
        return min(len(others), spec.max_value)
    raise FeatureError(f"no extractor for feature '{name}'")


def extract(corpus: Corpus, config: FeatureConfig, jobs: int = 1) -> FeatureTable:
    """Extract the configured features for every retained mention.

    Chain-derived features are computed over same-chain mentions in document
    order.  With ``subsequent_only`` set, chain-opening mentions are dropped
    after feature computation.  ``jobs`` > 1 extracts documents in parallel;
    rows are always assembled in document order, so the result is identical.
    """
    specs = config.selected_specs()
    if jobs > 1 and len(corpus.documents) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            per_doc = list(
                pool.map(_document_rows, corpus.documents,
                         [specs] * len(corpus.documents))
            )
    else:
        per_doc = [_document_rows(doc, specs) for doc in corpus.documents]
    rows = [row for doc_rows in per_doc for row in doc_rows]
    if config.subsequent_only:
        first_flags = _first_mention_flags(corpus)
        rows = [row for row, first in zip(rows, first_flags) if not first]
    return FeatureTable(specs=specs, rows=tuple(rows), system_name=config.system_name)


def _first_mention_flags(corpus: Corpus) -> list[bool]:
    flags = []
    for doc in corpus.documents:
        seen: set[str] = set()
        for mention in doc.mentions:
            flags.append(mention.chain_id not in seen)
            seen.add(mention.chain_id)
    return flags


def encode(table: FeatureTable) -> tuple[np.ndarray, np.ndarray, list[str]]:
    """Encode a feature table as (matrix, labels, column map).

    Categorical features become one-hot blocks over their full domain,
    ordinals are scaled to [0, 1] by their clamp, binaries become 0/1.
    Labels follow the canonical form order.
    """
    if not table.rows:
        raise FeatureError("cannot encode an empty feature table")
    column_map = table.column_map()
    X = np.zeros((len(table.rows), len(column_map)), dtype=np.float64)
    y = np.zeros(len(table.rows), dtype=np.int64)
    for i, row in enumerate(table.rows):
        y[i] = FORM_INDEX[row.gold]
        col = 0
        for spec, value in zip(table.specs, row.values):
            if spec.kind is FeatureKind.CATEGORICAL:
                X[i, col + spec.domain.index(value)] = 1.0
                col += len(spec.domain)
            elif spec.kind is FeatureKind.ORDINAL:
                X[i, col] = value / spec.max_value
                col += 1
            else:
                X[i, col] = 1.0 if value else 0.0
                col += 1
    return X, y, column_map


def feature_table_to_tsv(table: FeatureTable) -> str:
    """Serialize a feature table to TSV with a header row."""
    header = ["doc_id", "mention_id", "gold", *table.feature_names]
    lines = ["\t".join(header)]
    for row in table.rows:
        cells = [row.doc_id, row.mention_id, row.gold.value]
        for spec, value in zip(table.specs, row.values):
            if spec.kind is FeatureKind.BINARY:
                cells.append("true" if value else "false")
            else:
                cells.append(str(value))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def feature_table_from_tsv(
    text: str, config: FeatureConfig
) -> FeatureTable:
    """Parse a TSV produced by :func:`feature_table_to_tsv`."""
    specs = config.selected_specs()
    lines = [line for line in text.splitlines() if line]
    if not lines:
        raise FeatureError("empty feature table file")
    header = lines[0].split("\t")
    expected = ["doc_id", "mention_id", "gold", *(s.name for s in specs)]
    if header != expected:
        raise FeatureError(f"feature table header {header} != expected {expected}")
    form_by_label = {form.value: form for form in CLASS_FORMS}
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != len(expected):
            raise FeatureError(f"line {lineno}: expected {len(expected)} columns")
        doc_id, mention_id, gold_label, *feature_cells = cells
        if gold_label not in form_by_label:
            raise FeatureError(f"line {lineno}: unknown gold label '{gold_label}'")
        values = []
        for spec, cell in zip(specs, feature_cells):
            if spec.kind is FeatureKind.BINARY:
                values.append(cell == "true")
            elif spec.kind is FeatureKind.ORDINAL:
                values.append(int(cell))
            else:
                if cell not in spec.domain:
                    raise FeatureError(
                        f"line {lineno}: value '{cell}' outside domain of '{spec.name}'"
                    )
                values.append(cell)
        rows.append(FeatureRow(doc_id, mention_id, form_by_label[gold_label], tuple(values)))
    return FeatureTable(specs=specs, rows=tuple(rows), system_name=config.system_name)
