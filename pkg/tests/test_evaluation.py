import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from refform.corpus import CLASS_FORMS, RefForm
from refform.evaluation import (
    EvalReport,
    EvaluationError,
    confusion_matrix,
    evaluate,
    f1_score,
    rank_models,
    report_from_confusion,
)
from refform.fixtures import load_benchmark_scores
from refform.models.base import Prediction

DESC, NAME, PRON = RefForm.DESCRIPTION, RefForm.NAME, RefForm.PRONOUN


def pred(mention_id, form, doc_id="d1"):
    probs = [0.0, 0.0, 0.0]
    probs[[DESC, NAME, PRON].index(form)] = 1.0
    return Prediction(doc_id, mention_id, form, tuple(probs))


def gold_map(pairs, doc_id="d1"):
    return {(doc_id, mid): form for mid, form in pairs}


class TestF1:
    def test_published_description_row(self):
        # P=55.36, R=19.38 -> F1=28.71
        assert 100 * f1_score(0.5536, 0.1938) == pytest.approx(28.71, abs=0.01)

    def test_macro_mean_of_three_class_f1(self):
        assert np.mean([28.71, 66.92, 74.64]) == pytest.approx(56.76, abs=0.01)

    def test_zero_over_zero_is_zero(self):
        assert f1_score(0.0, 0.0) == 0.0


class TestEvaluate:
    def test_perfect_predictions(self):
        gold = gold_map([("m1", DESC), ("m2", NAME), ("m3", PRON)])
        report = evaluate([pred("m1", DESC), pred("m2", NAME), pred("m3", PRON)], gold)
        assert report.accuracy == 1.0
        assert report.macro_f1 == 1.0
        assert report.weighted_f1 == 1.0
        assert all(c.f1 == 1.0 for c in report.per_class.values())

    def test_absent_class_scores_zero_but_macro_averages_three(self):
        gold = gold_map([("m1", NAME), ("m2", PRON)])
        report = evaluate([pred("m1", NAME), pred("m2", PRON)], gold)
        desc = report.per_class["description"]
        assert (desc.precision, desc.recall, desc.f1) == (0.0, 0.0, 0.0)
        assert report.macro_f1 == pytest.approx((0.0 + 1.0 + 1.0) / 3)

    def test_missing_prediction_lists_mention(self):
        gold = gold_map([("m1", NAME), ("m2", PRON)])
        with pytest.raises(EvaluationError, match="m2"):
            evaluate([pred("m1", NAME)], gold)

    def test_duplicate_prediction_lists_mention(self):
        gold = gold_map([("m1", NAME)])
        with pytest.raises(EvaluationError, match="duplicate.*m1"):
            evaluate([pred("m1", NAME), pred("m1", PRON)], gold)

    def test_row_order_does_not_matter(self):
        gold = gold_map([("m1", NAME), ("m2", PRON), ("m3", DESC)])
        preds = [pred("m1", PRON), pred("m2", PRON), pred("m3", DESC)]
        assert evaluate(preds, gold) == evaluate(list(reversed(preds)), gold)

    def test_report_json_round_trip(self):
        gold = gold_map([("m1", NAME), ("m2", PRON)])
        report = evaluate([pred("m1", NAME), pred("m2", NAME)], gold)
        clone = EvalReport.from_dict(report.to_dict())
        assert clone == report


class TestConfusion:
    def test_perfect_is_diagonal(self):
        gold = gold_map([("m1", DESC), ("m2", NAME), ("m3", PRON)])
        matrix = confusion_matrix(
            [pred("m1", DESC), pred("m2", NAME), pred("m3", PRON)], gold
        )
        assert np.array_equal(matrix, np.eye(3, dtype=int))

    def test_single_error_off_diagonal(self):
        gold = gold_map([("m1", PRON)])
        matrix = confusion_matrix([pred("m1", NAME)], gold)
        expected = np.zeros((3, 3), dtype=int)
        expected[2, 1] = 1
        assert np.array_equal(matrix, expected)

    def test_column_sums_match_predicted_counts(self):
        rng = np.random.RandomState(3)
        forms = [CLASS_FORMS[i] for i in rng.randint(0, 3, size=40)]
        predicted = [CLASS_FORMS[i] for i in rng.randint(0, 3, size=40)]
        gold = gold_map([(f"m{i}", f) for i, f in enumerate(forms)])
        preds = [pred(f"m{i}", f) for i, f in enumerate(predicted)]
        matrix = confusion_matrix(preds, gold)
        independent = [sum(1 for p in predicted if p is c) for c in CLASS_FORMS]
        assert matrix.sum(axis=0).tolist() == independent
        assert matrix.sum() == 40


@st.composite
def confusions(draw):
    cells = draw(
        st.lists(st.integers(min_value=0, max_value=40), min_size=9, max_size=9)
    )
    matrix = np.array(cells).reshape(3, 3)
    if matrix.sum() == 0:
        matrix[0, 0] = 1
    return matrix


class TestMetricIdentities:
    @given(confusions())
    @settings(max_examples=80, deadline=None)
    def test_micro_f1_equals_accuracy(self, matrix):
        # single-label multiclass: micro precision = micro recall = accuracy
        tp = np.trace(matrix)
        micro_p = tp / matrix.sum(axis=0).sum()
        micro_r = tp / matrix.sum(axis=1).sum()
        micro_f1 = f1_score(micro_p, micro_r) if tp else 0.0
        report = report_from_confusion(matrix)
        assert abs(micro_f1 - report.accuracy) < 1e-9

    @given(confusions())
    @settings(max_examples=80, deadline=None)
    def test_aggregates_lie_between_class_extremes(self, matrix):
        report = report_from_confusion(matrix)
        f1s = [c.f1 for c in report.per_class.values()]
        assert min(f1s) - 1e-12 <= report.macro_f1 <= max(f1s) + 1e-12
        supported = [c.f1 for c in report.per_class.values() if c.support]
        assert min(supported) - 1e-12 <= report.weighted_f1 <= max(supported) + 1e-12


class TestRanking:
    @staticmethod
    def scores(corpus, metric):
        rows = [r for r in load_benchmark_scores() if r.corpus == corpus]
        return [(r.model, r.metric(metric)) for r in rows]

    def test_msr_accuracy_order(self):
        ranking = rank_models(self.scores("msr", "accuracy"), "accuracy")
        assert ranking.render() == (
            "BERT > ICSI > RoBERTa > CNTS > OSU > IS-G > UDel"
        )

    def test_neg_accuracy_tie_shares_first_rank(self):
        ranking = rank_models(self.scores("neg", "accuracy"), "accuracy")
        assert ranking.render() == (
            "UDel = RoBERTa > ICSI > OSU > CNTS > BERT > IS-G"
        )
        assert ranking.entries[0][0] == ranking.entries[1][0] == 1

    def test_all_equal_scores_share_one_rank(self):
        ranking = rank_models([("a", 0.5), ("b", 0.5), ("c", 0.5)], "accuracy")
        assert {rank for rank, _, _ in ranking.entries} == {1}
        assert ranking.render() == "a = b = c"

    def test_needs_two_models(self):
        with pytest.raises(EvaluationError):
            rank_models([("only", 1.0)], "accuracy")
