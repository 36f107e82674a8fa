"""Seeded synthetic-corpus generation for tests and demos.

The generator builds small discourse documents whose referential forms
follow configurable conditional rules, so a corpus can be made learnable by
construction.  Two rule presets ship:

``default``
    First mentions take a name (human referents) or a description; a
    same-sentence or previous-sentence antecedent yields a pronoun with the
    configured probability; distant antecedents fall back to a name.

``role_only``
    The form is a pure function of grammatical role (subject -> pronoun,
    object -> name, otherwise description) and every referent is human, so
    the semantic-category feature is constant.  Used by the importance
    sanity checks.

A generation manifest (the generator settings plus the exact statistics of
the produced corpus) is returned alongside the corpus.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .corpus import Corpus, CorpusError, Document, GramRole, Mention, RefForm, compute_stats

RULE_PRESETS = ("default", "role_only")

_FIRST_NAMES = ("Alba", "Boris", "Cora", "Denzel", "Edith", "Farid", "Greta", "Hugo")
_LAST_NAMES = ("Reyes", "Okafor", "Lindt", "Mesa", "Novak", "Price")
_PLACE_STEMS = ("Avelar", "Brinn", "Calder", "Dorwyn", "Eskel", "Fanum")
_CATEGORY_NOUNS = {
    "human": ("chef", "composer", "inventor"),
    "city": ("city", "town"),
    "country": ("country", "nation"),
    "river": ("river", "stream"),
    "mountain": ("mountain", "peak"),
    "organization": ("company", "agency"),
}
_PRONOUNS = {
    "human": {"subject": "he", "object": "him", "determiner": "his", "other": "he"},
    "_default": {"subject": "it", "object": "it", "determiner": "its", "other": "it"},
}
_FILLERS = (
    "soon", "later", "quietly", "again", "famously", "opened", "visited",
    "founded", "near", "during", "the", "festival", "harbor", "in", "spring",
    "records", "show", "that", "once", "grew",
)


@dataclass(frozen=True)
class SynthSpec:
    n_docs: int = 100
    seed: int = 0
    rules: str = "default"
    noise: float = 0.0
    empty_rate: float = 0.0
    pronoun_given_same: float = 1.0
    pronoun_given_previous: float = 1.0
    min_chains: int = 2
    max_chains: int = 3
    min_chain_mentions: int = 2
    max_chain_mentions: int = 5

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise CorpusError(f"n_docs must be >= 1, got {self.n_docs}")
        if self.rules not in RULE_PRESETS:
            raise CorpusError(f"unknown rule preset '{self.rules}'")
        for name in ("noise", "empty_rate", "pronoun_given_same", "pronoun_given_previous"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise CorpusError(f"{name} must be in [0, 1], got {value}")
        if not 1 <= self.min_chains <= self.max_chains:
            raise CorpusError("chain count bounds are invalid")
        if not 1 <= self.min_chain_mentions <= self.max_chain_mentions:
            raise CorpusError("chain mention bounds are invalid")


def _canonical_name(rng, category: str, taken: set[str]) -> str:
    while True:
        if category == "human":
            name = f"{_FIRST_NAMES[rng.randint(len(_FIRST_NAMES))]} " \
                   f"{_LAST_NAMES[rng.randint(len(_LAST_NAMES))]}"
        else:
            stem = _PLACE_STEMS[rng.randint(len(_PLACE_STEMS))]
            name = f"{stem} {_CATEGORY_NOUNS[category][0].capitalize()}"
        if name not in taken:
            taken.add(name)
            return name


def _rule_form(spec: SynthSpec, rng, category: str, role: str,
               distance: str) -> RefForm:
    if spec.rules == "role_only":
        form = {
            "subject": RefForm.PRONOUN,
            "object": RefForm.NAME,
        }.get(role, RefForm.DESCRIPTION)
    elif distance == "first":
        form = RefForm.NAME if category == "human" else RefForm.DESCRIPTION
    elif distance == "same":
        take = rng.random_sample() < spec.pronoun_given_same
        form = RefForm.PRONOUN if take else RefForm.NAME
    elif distance == "previous":
        take = rng.random_sample() < spec.pronoun_given_previous
        form = RefForm.PRONOUN if take else RefForm.NAME
    else:  # far
        form = RefForm.NAME
    if spec.noise > 0.0 and rng.random_sample() < spec.noise:
        choices = [RefForm.DESCRIPTION, RefForm.NAME, RefForm.PRONOUN]
        form = choices[rng.randint(3)]
    return form


def _surface_tokens(form: RefForm, category: str, role: str, name: str,
                    rng) -> list[str]:
    if form is RefForm.NAME:
        return name.split()
    if form in (RefForm.PRONOUN, RefForm.EMPTY):
        table = _PRONOUNS.get(category, _PRONOUNS["_default"])
        return [table[role]]
    nouns = _CATEGORY_NOUNS[category]
    return ["the", nouns[rng.randint(len(nouns))]]


def _generate_document(spec: SynthSpec, rng, index: int) -> Document:
    doc_id = f"synth-{index:04d}"
    par_sizes = [int(rng.randint(2, 4)) for _ in range(int(rng.randint(2, 4)))]
    n_sent = sum(par_sizes)

    if spec.rules == "role_only":
        categories = ["human"]
    else:
        categories = list(_CATEGORY_NOUNS)
    taken: set[str] = set()
    chains = []
    n_chains = int(rng.randint(spec.min_chains, spec.max_chains + 1))
    for c in range(n_chains):
        category = categories[rng.randint(len(categories))]
        chains.append((f"{doc_id}-c{c}", category,
                       _canonical_name(rng, category, taken)))

    # assign each mention to a sentence; chains walk forward through the text
    placements = []  # (sent_index, chain_pos, chain_id, category, name)
    for chain_id, category, name in chains:
        n_mentions = int(rng.randint(spec.min_chain_mentions,
                                     spec.max_chain_mentions + 1))
        sent = int(rng.randint(0, n_sent))
        previous_sent = None
        for pos in range(n_mentions):
            if pos > 0:
                step = int(rng.choice([0, 1, 1, 2, 3]))
                sent = min(sent + step, n_sent - 1)
            placements.append((sent, pos, previous_sent, chain_id, category, name))
            previous_sent = sent

    by_sentence: dict[int, list] = {}
    for placement in placements:
        by_sentence.setdefault(placement[0], []).append(placement)

    sentences: list[list[str]] = []
    mentions: list[Mention] = []
    counter = 0
    for s in range(n_sent):
        tokens: list[str] = []
        slots = by_sentence.get(s, [])
        for slot_index, placement in enumerate(slots):
            sent_index, pos, previous_sent, chain_id, category, name = placement
            role = ("subject", "object")[slot_index] if slot_index < 2 else \
                ("determiner", "other")[int(rng.randint(2))]
            if pos == 0:
                distance = "first"
            else:
                delta = sent_index - previous_sent
                distance = "same" if delta == 0 else (
                    "previous" if delta == 1 else "far")
            form = _rule_form(spec, rng, category, role, distance)
            if (pos > 0 and spec.empty_rate > 0.0
                    and rng.random_sample() < spec.empty_rate):
                form = RefForm.EMPTY
            surface = _surface_tokens(form, category, role, name, rng)
            start = len(tokens)
            tokens.extend(surface)
            mentions.append(Mention(
                mention_id=f"{doc_id}-m{counter}",
                chain_id=chain_id,
                par_index=0,  # fixed up below once paragraph bounds are known
                sent_index=s,
                token_start=start,
                token_end=len(tokens),
                form=form,
                gram_role=GramRole(role),
                sem_category=category,
                canonical_name=name,
                surface=" ".join(surface),
            ))
            counter += 1
            for _ in range(int(rng.randint(1, 4))):
                tokens.append(_FILLERS[rng.randint(len(_FILLERS))])
        if not tokens:
            for _ in range(int(rng.randint(3, 6))):
                tokens.append(_FILLERS[rng.randint(len(_FILLERS))])
        tokens.append(".")
        sentences.append(tokens)

    paragraphs = []
    offset = 0
    sent_par = {}
    for p, size in enumerate(par_sizes):
        paragraphs.append(tuple(tuple(t) for t in sentences[offset:offset + size]))
        for s in range(offset, offset + size):
            sent_par[s] = p
        offset += size
    mentions = [
        Mention(
            mention_id=m.mention_id, chain_id=m.chain_id,
            par_index=sent_par[m.sent_index], sent_index=m.sent_index,
            token_start=m.token_start, token_end=m.token_end, form=m.form,
            gram_role=m.gram_role, sem_category=m.sem_category,
            canonical_name=m.canonical_name, surface=m.surface,
        )
        for m in sorted(mentions, key=lambda m: (m.sent_index, m.token_start))
    ]
    return Document(doc_id=doc_id, genre="synthetic",
                    paragraphs=tuple(paragraphs), mentions=tuple(mentions))


def generate_corpus(spec: SynthSpec, name: str = "synth") -> tuple[Corpus, dict]:
    """Generate a corpus and its manifest of expected statistics."""
    rng = np.random.RandomState(spec.seed)
    documents = tuple(
        _generate_document(spec, rng, i) for i in range(spec.n_docs)
    )
    corpus = Corpus(name=name, documents=documents)
    manifest = {
        "generator": asdict(spec),
        "stats": compute_stats(corpus).to_dict(),
    }
    return corpus, manifest
