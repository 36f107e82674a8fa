import pytest

from refform.corpus import RefForm, compute_stats
from refform.synth import SynthSpec, generate_corpus


def test_generation_is_deterministic():
    first, manifest_a = generate_corpus(SynthSpec(n_docs=20, seed=3))
    second, manifest_b = generate_corpus(SynthSpec(n_docs=20, seed=3))
    assert first == second
    assert manifest_a == manifest_b


def test_different_seeds_differ():
    a, _ = generate_corpus(SynthSpec(n_docs=10, seed=1))
    b, _ = generate_corpus(SynthSpec(n_docs=10, seed=2))
    assert a != b


def test_manifest_matches_recomputed_stats():
    corpus, manifest = generate_corpus(SynthSpec(n_docs=25, seed=9))
    assert manifest["stats"] == compute_stats(corpus).to_dict()
    assert manifest["generator"]["seed"] == 9


def test_role_only_rules_bind_form_to_role():
    corpus, _ = generate_corpus(SynthSpec(n_docs=15, seed=5, rules="role_only"))
    expected = {
        "subject": RefForm.PRONOUN,
        "object": RefForm.NAME,
        "determiner": RefForm.DESCRIPTION,
        "other": RefForm.DESCRIPTION,
    }
    for doc in corpus.documents:
        for mention in doc.mentions:
            assert mention.form is expected[mention.gram_role.value]
            assert mention.sem_category == "human"


def test_empty_rate_produces_empty_mentions():
    corpus, manifest = generate_corpus(
        SynthSpec(n_docs=30, seed=7, empty_rate=0.3)
    )
    assert "empty" in manifest["stats"]["form_pct"]
    assert sum(manifest["stats"]["form_pct"].values()) == pytest.approx(100.0)


def test_all_three_labels_present_at_defaults():
    _, manifest = generate_corpus(SynthSpec(n_docs=40, seed=0))
    pct = manifest["stats"]["form_pct"]
    assert set(pct) == {"description", "name", "pronoun"}
    assert min(pct.values()) > 5.0


def test_invalid_spec_rejected():
    with pytest.raises(Exception):
        SynthSpec(n_docs=0)
    with pytest.raises(Exception):
        SynthSpec(noise=1.5)
    with pytest.raises(Exception):
        SynthSpec(rules="chaotic")
