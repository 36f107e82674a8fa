"""Data model for coreference-annotated discourse corpora.

A corpus is a set of documents; each document carries its token text
(paragraphs > sentences > tokens) and an ordered list of mentions, where a
mention is an annotated referring expression: its span, coreference chain,
grammatical role, semantic category, and gold referential form.

The canonical on-disk format is line-delimited JSON, one document record per
line::

    {"doc_id": ..., "genre": ..., "paragraphs": [[["tok", ...], ...], ...],
     "mentions": [{"mention_id": ..., "chain_id": ..., "par_index": ...,
                   "sent_index": ..., "token_start": ..., "token_end": ...,
                   "form": "description|name|pronoun|empty",
                   "gram_role": "subject|object|determiner|other",
                   "sem_category": ..., "canonical_name": ..., "surface": ...}]}

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np


class CorpusError(ValueError):
    """Malformed corpus data or an invalid corpus operation."""


class RefForm(Enum):
    """Referential form of a mention.

    The three classification labels have a fixed canonical (alphabetical)
    order, DESCRIPTION < NAME < PRONOUN, which is the global tie-break order
    for every argmax in the toolkit.  EMPTY marks covert references; it only
    exists at ingestion time and is filtered before any modelling.
    """

    DESCRIPTION = "description"
    NAME = "name"
    PRONOUN = "pronoun"
    EMPTY = "empty"


#: The classification label set in canonical order.
CLASS_FORMS: tuple[RefForm, ...] = (RefForm.DESCRIPTION, RefForm.NAME, RefForm.PRONOUN)

#: Canonical label index of each classification form.
FORM_INDEX: Mapping[RefForm, int] = {form: i for i, form in enumerate(CLASS_FORMS)}

_FORM_BY_LABEL = {form.value: form for form in RefForm}


class GramRole(Enum):
    SUBJECT = "subject"
    OBJECT = "object"
    DETERMINER = "determiner"
    OTHER = "other"


_ROLE_BY_LABEL = {role.value: role for role in GramRole}


@dataclass(frozen=True)
class Mention:
    """One annotated referring expression.

    ``sent_index`` is document-global (0-based); ``token_start``/``token_end``
    are a sentence-local half-open token span.
    """

    mention_id: str
    chain_id: str
    par_index: int
    sent_index: int
    token_start: int
    token_end: int
    form: RefForm
    gram_role: GramRole
    sem_category: str
    canonical_name: str
    surface: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    genre: str
    paragraphs: tuple[tuple[tuple[str, ...], ...], ...]
    mentions: tuple[Mention, ...]

    @cached_property
    def sentences(self) -> tuple[tuple[str, ...], ...]:
        """Sentences flattened across paragraphs, in document order."""
        return tuple(sent for par in self.paragraphs for sent in par)

    @cached_property
    def sentence_paragraphs(self) -> tuple[int, ...]:
        """Paragraph index of each global sentence."""
        return tuple(
            p for p, par in enumerate(self.paragraphs) for _ in par
        )

    @cached_property
    def paragraph_initial_sentences(self) -> frozenset[int]:
        """Global indices of sentences that open a paragraph."""
        initial = []
        offset = 0
        for par in self.paragraphs:
            if par:
                initial.append(offset)
            offset += len(par)
        return frozenset(initial)

    @cached_property
    def sentence_token_offsets(self) -> tuple[int, ...]:
        """Document-global token offset of each sentence start."""
        offsets = []
        total = 0
        for sent in self.sentences:
            offsets.append(total)
            total += len(sent)
        return tuple(offsets)

    @property
    def n_tokens(self) -> int:
        return sum(len(sent) for sent in self.sentences)

    @property
    def n_sentences(self) -> int:
        return len(self.sentences)

    @property
    def n_paragraphs(self) -> int:
        return len(self.paragraphs)

    @property
    def chain_ids(self) -> tuple[str, ...]:
        """Distinct chain ids in first-mention order."""
        seen: dict[str, None] = {}
        for mention in self.mentions:
            seen.setdefault(mention.chain_id, None)
        return tuple(seen)


@dataclass(frozen=True)
class Corpus:
    name: str
    documents: tuple[Document, ...]

    @property
    def n_mentions(self) -> int:
        return sum(len(doc.mentions) for doc in self.documents)

    def iter_mentions(self) -> Iterable[tuple[Document, Mention]]:
        for doc in self.documents:
            for mention in doc.mentions:
                yield doc, mention


@dataclass(frozen=True)
class CorpusStats:
    """Corpus-level counts and per-document means.

    ``form_pct`` maps a form label to its percentage among all retained
    mentions; the percentages of the forms present sum to 100.
    """

    n_docs: int
    n_mentions: int
    mean_words: float
    mean_sentences: float
    mean_paragraphs: float
    mean_chains: float
    form_pct: Mapping[str, float]

    def to_dict(self) -> dict:
        return {
            "n_docs": self.n_docs,
            "n_mentions": self.n_mentions,
            "mean_words_per_doc": self.mean_words,
            "mean_sentences_per_doc": self.mean_sentences,
            "mean_paragraphs_per_doc": self.mean_paragraphs,
            "mean_chains_per_doc": self.mean_chains,
            "form_pct": dict(self.form_pct),
        }


@dataclass(frozen=True)
class SplitSpec:
    """Document-wise train/dev/test split ratios plus shuffle seed."""

    train: float
    dev: float
    test: float
    seed: int = 0

    def __post_init__(self) -> None:
        ratios = (self.train, self.dev, self.test)
        if any(not 0.0 < r < 1.0 for r in ratios):
            raise CorpusError(f"split ratios must lie in (0, 1), got {ratios}")
        if abs(sum(ratios) - 1.0) > 1e-9:
            raise CorpusError(f"split ratios must sum to 1, got {sum(ratios)!r}")


def _require(record: Mapping, key: str, context: str):
    if key not in record:
        raise CorpusError(f"{context}: missing field '{key}'")
    return record[key]


def _mention_from_record(record: Mapping, context: str) -> Mention:
    form_label = _require(record, "form", context)
    if form_label not in _FORM_BY_LABEL:
        raise CorpusError(f"{context}: unknown form label '{form_label}'")
    role_label = _require(record, "gram_role", context)
    if role_label not in _ROLE_BY_LABEL:
        raise CorpusError(f"{context}: unknown gram_role label '{role_label}'")
    return Mention(
        mention_id=str(_require(record, "mention_id", context)),
        chain_id=str(_require(record, "chain_id", context)),
        par_index=int(_require(record, "par_index", context)),
        sent_index=int(_require(record, "sent_index", context)),
        token_start=int(_require(record, "token_start", context)),
        token_end=int(_require(record, "token_end", context)),
        form=_FORM_BY_LABEL[form_label],
        gram_role=_ROLE_BY_LABEL[role_label],
        sem_category=str(_require(record, "sem_category", context)),
        canonical_name=str(_require(record, "canonical_name", context)),
        surface=str(_require(record, "surface", context)),
    )


def _validate_mention(mention: Mention, doc: Document, context: str) -> None:
    ctx = f"{context}: mention '{mention.mention_id}'"
    if not mention.chain_id:
        raise CorpusError(f"{ctx}: empty chain_id")
    if not 0 <= mention.par_index < doc.n_paragraphs:
        raise CorpusError(f"{ctx}: par_index {mention.par_index} out of range")
    if not 0 <= mention.sent_index < doc.n_sentences:
        raise CorpusError(f"{ctx}: sent_index {mention.sent_index} out of range")
    if doc.sentence_paragraphs[mention.sent_index] != mention.par_index:
        raise CorpusError(
            f"{ctx}: sentence {mention.sent_index} is not in paragraph "
            f"{mention.par_index}"
        )
    sentence = doc.sentences[mention.sent_index]
    if not 0 <= mention.token_start < mention.token_end:
        raise CorpusError(
            f"{ctx}: invalid token span [{mention.token_start}, {mention.token_end})"
        )
    if mention.token_end > len(sentence):
        raise CorpusError(
            f"{ctx}: token_end {mention.token_end} exceeds sentence length "
            f"{len(sentence)}"
        )


def _validate_chains(doc: Document, context: str) -> None:
    names: dict[str, tuple[str, str]] = {}
    for mention in doc.mentions:
        key = mention.chain_id
        value = (mention.canonical_name, mention.sem_category)
        if key in names and names[key] != value:
            raise CorpusError(
                f"{context}: chain '{key}' mixes canonical_name/sem_category "
                f"{names[key]} and {value}"
            )
        names.setdefault(key, value)


def document_from_record(record: Mapping, context: str = "document") -> Document:
    """Build and validate a Document from a parsed JSON record."""
    doc_id = str(_require(record, "doc_id", context))
    context = f"{context} '{doc_id}'"
    paragraphs_raw = _require(record, "paragraphs", context)
    try:
        paragraphs = tuple(
            tuple(tuple(str(tok) for tok in sent) for sent in par)
            for par in paragraphs_raw
        )
    except TypeError as exc:
        raise CorpusError(f"{context}: malformed paragraphs: {exc}") from None
    mentions = tuple(
        _mention_from_record(rec, context)
        for rec in _require(record, "mentions", context)
    )
    doc = Document(
        doc_id=doc_id,
        genre=str(_require(record, "genre", context)),
        paragraphs=paragraphs,
        mentions=tuple(
            sorted(mentions, key=lambda m: (m.sent_index, m.token_start))
        ),
    )
    ids = [m.mention_id for m in doc.mentions]
    if len(set(ids)) != len(ids):
        raise CorpusError(f"{context}: duplicate mention_id")
    for mention in doc.mentions:
        _validate_mention(mention, doc, context)
    _validate_chains(doc, context)
    return doc


def document_to_record(doc: Document) -> dict:
    """Inverse of :func:`document_from_record`."""
    return {
        "doc_id": doc.doc_id,
        "genre": doc.genre,
        "paragraphs": [[list(sent) for sent in par] for par in doc.paragraphs],
        "mentions": [
            {
                "mention_id": m.mention_id,
                "chain_id": m.chain_id,
                "par_index": m.par_index,
                "sent_index": m.sent_index,
                "token_start": m.token_start,
                "token_end": m.token_end,
                "form": m.form.value,
                "gram_role": m.gram_role.value,
                "sem_category": m.sem_category,
                "canonical_name": m.canonical_name,
                "surface": m.surface,
            }
            for m in doc.mentions
        ],
    }


def _drop_empty(doc: Document) -> Document:
    kept = tuple(m for m in doc.mentions if m.form is not RefForm.EMPTY)
    if len(kept) == len(doc.mentions):
        return doc
    return Document(doc.doc_id, doc.genre, doc.paragraphs, kept)


def parse_corpus(path: str | Path, include_empty: bool = False,
                 name: str | None = None) -> Corpus:
    """Parse a line-delimited JSON corpus file.

    Mentions with form ``empty`` are dropped unless ``include_empty`` is set
    (their chains are retained).  Raises :class:`CorpusError` naming the
    document and line on any schema violation.
    """
    path = Path(path)
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            doc = document_from_record(record, context=f"{path}:{lineno}: document")
            if not include_empty:
                doc = _drop_empty(doc)
            documents.append(doc)
    if not documents:
        raise CorpusError(f"{path}: no document records found")
    ids = [doc.doc_id for doc in documents]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise CorpusError(f"{path}: duplicate doc_ids: {', '.join(dupes)}")
    return Corpus(name=name or path.stem, documents=tuple(documents))


def corpus_to_jsonl(corpus: Corpus) -> str:
    """Serialize a corpus to its line-delimited JSON text."""
    return "".join(
        json.dumps(document_to_record(doc), ensure_ascii=False) + "\n"
        for doc in corpus.documents
    )


def compute_stats(corpus: Corpus) -> CorpusStats:
    """Counts, per-document means, and the form distribution of a corpus."""
    if not corpus.documents:
        raise CorpusError("cannot compute statistics of an empty corpus")
    n_docs = len(corpus.documents)
    form_counts: dict[str, int] = {}
    for doc in corpus.documents:
        for mention in doc.mentions:
            label = mention.form.value
            form_counts[label] = form_counts.get(label, 0) + 1
    n_mentions = sum(form_counts.values())
    form_pct = {
        label: 100.0 * count / n_mentions for label, count in sorted(form_counts.items())
    }
    return CorpusStats(
        n_docs=n_docs,
        n_mentions=n_mentions,
        mean_words=sum(d.n_tokens for d in corpus.documents) / n_docs,
        mean_sentences=sum(d.n_sentences for d in corpus.documents) / n_docs,
        mean_paragraphs=sum(d.n_paragraphs for d in corpus.documents) / n_docs,
        mean_chains=sum(len(d.chain_ids) for d in corpus.documents) / n_docs,
        form_pct=form_pct,
    )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_corpus(corpus: Corpus, spec: SplitSpec) -> tuple[Corpus, Corpus, Corpus]:
    """Seeded document-wise partition into (train, dev, test).

    Sizes are round(n * ratio) for dev and test with the remainder going to
    train.  The same (corpus, spec) pair always yields the same partition.
    """
    n = len(corpus.documents)
    if n < 3:
        raise CorpusError(f"need at least 3 documents to split, got {n}")
    n_dev = _round_half_up(n * spec.dev)
    n_test = _round_half_up(n * spec.test)
    n_train = n - n_dev - n_test
    if n_dev < 1 or n_test < 1 or n_train < 0:
        raise CorpusError(
            f"corpus of {n} documents cannot satisfy split "
            f"({n_train}/{n_dev}/{n_test})"
        )
    order = np.random.RandomState(spec.seed).permutation(n)
    groups = (
        sorted(order[:n_train]),
        sorted(order[n_train:n_train + n_dev]),
        sorted(order[n_train + n_dev:]),
    )
    parts = tuple(
        Corpus(
            name=f"{corpus.name}-{part}",
            documents=tuple(corpus.documents[i] for i in idx),
        )
        for part, idx in zip(("train", "dev", "test"), groups)
    )
    return parts


SPLIT_NAMES = ("train", "dev", "test")


def load_split_assignment(path: str | Path) -> dict[str, str]:
    """Read a two-column TSV mapping doc_id to train/dev/test."""
    assignment: dict[str, str] = {}
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"{path}:{lineno}: expected 2 tab-separated columns")
            doc_id, split = parts
            if split not in SPLIT_NAMES:
                raise CorpusError(f"{path}:{lineno}: unknown split '{split}'")
            if doc_id in assignment:
                raise CorpusError(f"{path}:{lineno}: doc_id '{doc_id}' assigned twice")
            assignment[doc_id] = split
    if not assignment:
        raise CorpusError(f"{path}: empty split assignment")
    return assignment


def split_corpus_by_assignment(
    corpus: Corpus, assignment: Mapping[str, str]
) -> tuple[Corpus, Corpus, Corpus]:
    """Partition documents by an explicit doc_id -> split assignment."""
    missing = [d.doc_id for d in corpus.documents if d.doc_id not in assignment]
    if missing:
        raise CorpusError(f"documents without split assignment: {', '.join(missing)}")
    buckets: dict[str, list[Document]] = {name: [] for name in SPLIT_NAMES}
    for doc in corpus.documents:
        buckets[assignment[doc.doc_id]].append(doc)
    return tuple(
        Corpus(name=f"{corpus.name}-{part}", documents=tuple(buckets[part]))
        for part in SPLIT_NAMES
    )
