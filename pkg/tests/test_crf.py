import itertools
import math

import numpy as np
import pytest

from refform.models.base import softmax
from refform.models.crf import (
    CrfModel,
    CrfParams,
    backward_log_partition,
    forward_log_partition,
    marginals,
    viterbi,
)

K = 3


def brute_force(unary, trans):
    """Score every label sequence exhaustively."""
    T = len(unary)
    scored = {}
    for path in itertools.product(range(K), repeat=T):
        score = sum(unary[t][path[t]] for t in range(T))
        score += sum(trans[path[t]][path[t + 1]] for t in range(T - 1))
        scored[path] = score
    return scored


def brute_log_partition(scored):
    mx = max(scored.values())
    return mx + math.log(sum(math.exp(s - mx) for s in scored.values()))


def brute_marginals(scored, T):
    log_z = brute_log_partition(scored)
    node = np.zeros((T, K))
    for path, score in scored.items():
        p = math.exp(score - log_z)
        for t, label in enumerate(path):
            node[t, label] += p
    return node


@pytest.fixture
def random_potentials():
    rng = np.random.RandomState(42)
    unary = rng.randn(3, K) * 1.5
    trans = rng.randn(K, K)
    return unary, trans


def test_length_one_sequence_is_a_softmax(random_potentials):
    unary, trans = random_potentials
    node, edge, log_z = marginals(unary[:1], trans)
    assert node[0] == pytest.approx(softmax(unary[0]), abs=1e-12)
    assert edge.shape == (0, K, K)
    assert log_z == pytest.approx(float(np.logaddexp.reduce(unary[0])))


def test_log_partition_matches_exhaustive_enumeration(random_potentials):
    unary, trans = random_potentials
    scored = brute_force(unary, trans)
    expected = brute_log_partition(scored)
    assert abs(forward_log_partition(unary, trans) - expected) < 1e-8


def test_forward_and_backward_partitions_agree(random_potentials):
    unary, trans = random_potentials
    forward = forward_log_partition(unary, trans)
    backward = backward_log_partition(unary, trans)
    assert abs(forward - backward) < 1e-8


def test_viterbi_matches_exhaustive_argmax(random_potentials):
    unary, trans = random_potentials
    scored = brute_force(unary, trans)
    expected = max(scored, key=scored.get)
    assert tuple(viterbi(unary, trans)) == expected


def test_viterbi_ties_take_the_lower_label():
    unary = np.zeros((3, K))
    trans = np.zeros((K, K))
    assert viterbi(unary, trans) == [0, 0, 0]


def test_marginals_sum_to_one_and_match_enumeration(random_potentials):
    unary, trans = random_potentials
    node, edge, _ = marginals(unary, trans)
    assert node.sum(axis=1) == pytest.approx(np.ones(3), abs=1e-8)
    for t in range(2):
        assert edge[t].sum() == pytest.approx(1.0, abs=1e-8)
    expected = brute_marginals(brute_force(unary, trans), 3)
    assert node == pytest.approx(expected, abs=1e-8)


def test_marginal_checks_hold_across_random_draws():
    rng = np.random.RandomState(7)
    for _ in range(25):
        T = rng.randint(1, 6)
        unary = rng.randn(T, K) * 2.0
        trans = rng.randn(K, K) * 2.0
        node, _, _ = marginals(unary, trans)
        assert node.sum(axis=1) == pytest.approx(np.ones(T), abs=1e-8)
        forward = forward_log_partition(unary, trans)
        backward = backward_log_partition(unary, trans)
        assert abs(forward - backward) < 1e-8
        scored = brute_force(unary, trans)
        assert abs(forward - brute_log_partition(scored)) < 1e-8
        expected = max(scored, key=scored.get)
        assert tuple(viterbi(unary, trans)) == expected


def test_training_learns_transition_structure():
    # labels alternate 1,2,1,2... regardless of features: only the
    # transition matrix can explain the data
    rng = np.random.RandomState(0)
    sequences = 20
    length = 6
    X = rng.rand(sequences * length, 2) * 0.01
    y = np.tile([1, 2], sequences * length // 2)
    groups = [slice(i * length, (i + 1) * length) for i in range(sequences)]
    model = CrfModel.train(X, y, CrfParams(iterations=150, seed=1), groups=groups)
    assert model.trans[1, 2] > model.trans[1, 1]
    assert model.trans[2, 1] > model.trans[2, 2]
    path = model.predict_paths(X[:length], [slice(0, length)])
    assert path.tolist() in ([1, 2, 1, 2, 1, 2], [2, 1, 2, 1, 2, 1])


def test_empty_groups_are_skipped():
    rng = np.random.RandomState(3)
    X = rng.rand(4, 2)
    y = np.array([0, 1, 2, 1])
    groups = [slice(0, 0), slice(0, 4)]
    model = CrfModel.train(X, y, CrfParams(iterations=5, seed=0), groups=groups)
    probs = model.predict_proba(X, groups=groups)
    assert probs.shape == (4, K)
    assert probs.sum(axis=1) == pytest.approx(np.ones(4), abs=1e-8)


def test_serialization_round_trip():
    rng = np.random.RandomState(9)
    X = rng.rand(12, 3)
    y = rng.randint(0, 3, size=12)
    groups = [slice(0, 6), slice(6, 12)]
    model = CrfModel.train(X, y, CrfParams(iterations=20, seed=2), groups=groups)
    clone = CrfModel.from_params(model.to_params())
    assert np.array_equal(
        model.predict_proba(X, groups=groups), clone.predict_proba(X, groups=groups)
    )
