"""Reader for the canonical corpus interchange format.

This package talks to the benchmark toolkit only through its file formats,
so it carries its own minimal parser for the line-delimited JSON corpus
(one document per line; see the toolkit README for the full schema).
Mentions labelled ``empty`` are skipped here: the classifier head covers the
three-way description/name/pronoun decision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

LABELS = ("description", "name", "pronoun")
LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Mention:
    mention_id: str
    chain_id: str
    sent_index: int
    token_start: int
    token_end: int
    form: str
    canonical_name: str
    surface: str


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[tuple[str, ...], ...]
    mentions: tuple[Mention, ...]


def _document_from_record(record: dict, context: str) -> Document:
    doc_id = str(record["doc_id"])
    sentences = tuple(
        tuple(str(t) for t in sent)
        for par in record["paragraphs"]
        for sent in par
    )
    mentions = []
    for m in record["mentions"]:
        form = m["form"]
        if form == "empty":
            continue
        if form not in LABELS:
            raise CorpusFormatError(
                f"{context}: document '{doc_id}': unknown form '{form}'"
            )
        mention = Mention(
            mention_id=str(m["mention_id"]),
            chain_id=str(m["chain_id"]),
            sent_index=int(m["sent_index"]),
            token_start=int(m["token_start"]),
            token_end=int(m["token_end"]),
            form=form,
            canonical_name=str(m["canonical_name"]),
            surface=str(m["surface"]),
        )
        if not mention.canonical_name:
            raise CorpusFormatError(
                f"{context}: document '{doc_id}': chain '{mention.chain_id}' "
                "has no canonical name"
            )
        mentions.append(mention)
    mentions.sort(key=lambda m: (m.sent_index, m.token_start))
    return Document(doc_id=doc_id, sentences=sentences, mentions=tuple(mentions))


def read_corpus(path: str | Path) -> list[Document]:
    path = Path(path)
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {exc}")
            documents.append(_document_from_record(record, f"{path}:{lineno}"))
    if not documents:
        raise CorpusFormatError(f"{path}: no document records found")
    return documents
