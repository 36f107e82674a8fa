"""Referent substitution.

Every mention in a document is replaced by its chain's canonical proper
name, and each mention becomes one classification instance carrying the
substituted document text plus the character span of its substituted
referent.  Spans are recomputed as the text is built, so earlier
replacements shift later spans correctly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus_io import Document


class PreprocessError(ValueError):
    pass


@dataclass(frozen=True)
class ReferentInstance:
    doc_id: str
    mention_id: str
    text: str
    char_start: int
    char_end: int
    gold: str

    @property
    def referent(self) -> str:
        return self.text[self.char_start:self.char_end]


def substitute_document(doc: Document) -> tuple[str, dict[str, tuple[int, int]]]:
    """Replace every mention with its canonical name.

    Returns the rebuilt document text (tokens joined by single spaces) and
    the character span of each mention in that text.
    """
    by_sentence: dict[int, list] = {}
    for mention in doc.mentions:
        by_sentence.setdefault(mention.sent_index, []).append(mention)
    for mentions in by_sentence.values():
        for earlier, later in zip(mentions, mentions[1:]):
            if later.token_start < earlier.token_end:
                raise PreprocessError(
                    f"document '{doc.doc_id}': mentions '{earlier.mention_id}' "
                    f"and '{later.mention_id}' overlap"
                )

    pieces: list[str] = []
    spans: dict[str, tuple[int, int]] = {}
    length = 0

    def emit(piece: str) -> tuple[int, int]:
        nonlocal length
        if pieces:
            length += 1  # joining space
        pieces.append(piece)
        start = length
        length += len(piece)
        return start, length

    for s, sentence in enumerate(doc.sentences):
        cursor = 0
        for mention in by_sentence.get(s, []):
            for token in sentence[cursor:mention.token_start]:
                emit(token)
            spans[mention.mention_id] = emit(mention.canonical_name)
            cursor = mention.token_end
        for token in sentence[cursor:]:
            emit(token)
    return " ".join(pieces), spans


def preprocess(documents: list[Document]) -> list[ReferentInstance]:
    """One instance per mention, over the substituted document text."""
    instances = []
    for doc in documents:
        text, spans = substitute_document(doc)
        for mention in doc.mentions:
            start, end = spans[mention.mention_id]
            instance = ReferentInstance(
                doc_id=doc.doc_id,
                mention_id=mention.mention_id,
                text=text,
                char_start=start,
                char_end=end,
                gold=mention.form,
            )
            if instance.referent != mention.canonical_name:
                raise PreprocessError(
                    f"document '{doc.doc_id}': span mismatch for mention "
                    f"'{mention.mention_id}'"
                )
            instances.append(instance)
    return instances
