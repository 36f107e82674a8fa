import json

import numpy as np

CUES = {"description": "afterwards", "name": "notably", "pronoun": "meanwhile"}
FIRST = ["Alba", "Boris", "Cora", "Denzel", "Edith", "Farid"]
LAST = ["Reyes", "Okafor", "Lindt", "Mesa", "Novak"]
FILLER = ["records", "show", "growth", "yesterday", "quietly", "team",
          "plans", "visited"]


def cue_document(doc_id, rng):
    """Six mentions of one person; the token before each mention names the
    gold form, which is the only signal correlated with the label."""
    name = f"{FIRST[rng.randint(len(FIRST))]} {LAST[rng.randint(len(LAST))]}"
    sentences, mentions = [], []
    for s in range(6):
        form = ("description", "name", "pronoun")[rng.randint(3)]
        surface = {"description": ["the", "chef"], "name": name.split(),
                   "pronoun": ["he"]}[form]
        tokens = [CUES[form], *surface,
                  FILLER[rng.randint(len(FILLER))],
                  FILLER[rng.randint(len(FILLER))], "."]
        mentions.append({
            "mention_id": f"{doc_id}-m{s}", "chain_id": f"{doc_id}-c0",
            "par_index": 0, "sent_index": s, "token_start": 1,
            "token_end": 1 + len(surface), "form": form,
            "gram_role": "subject", "sem_category": "human",
            "canonical_name": name, "surface": " ".join(surface),
        })
        sentences.append(tokens)
    return {"doc_id": doc_id, "genre": "cue", "paragraphs": [sentences],
            "mentions": mentions}


def write_cue_corpus(path, n_docs, seed):
    rng = np.random.RandomState(seed)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_docs):
            fh.write(json.dumps(cue_document(f"cue-{seed}-{i:03d}", rng)) + "\n")
    return path


def chef_record():
    """One chain over three sentences; mention surfaces vary in length."""
    paragraphs = [[
        ["David", "Chang", "opened", "a", "noodle", "bar", "."],
        ["He", "studied", "religion", "at", "college", "."],
        ["Critics", "praised", "the", "chef", "warmly", "."],
    ]]
    kw = {"chain_id": "c1", "par_index": 0, "gram_role": "subject",
          "sem_category": "human", "canonical_name": "David Chang"}
    mentions = [
        {"mention_id": "m0", "sent_index": 0, "token_start": 0, "token_end": 2,
         "form": "name", "surface": "David Chang", **kw},
        {"mention_id": "m1", "sent_index": 1, "token_start": 0, "token_end": 1,
         "form": "pronoun", "surface": "He", **kw},
        {"mention_id": "m2", "sent_index": 2, "token_start": 2, "token_end": 4,
         "form": "description", "surface": "the chef", **kw},
    ]
    return {"doc_id": "chef", "genre": "wiki", "paragraphs": paragraphs,
            "mentions": mentions}


def write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    return path


