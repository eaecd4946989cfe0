"""Metric tests against brute-force tally oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tinytrain import metrics, nn
from tinytrain.errors import ShapeError


def tally_oracle(y_true, y_pred, k):
    """Dictionary-counting reimplementation of every metric."""
    counts = {}
    for t, p in zip(y_true, y_pred):
        counts[(int(t), int(p))] = counts.get((int(t), int(p)), 0) + 1
    cm = [[counts.get((i, j), 0) for j in range(k)] for i in range(k)]
    correct = sum(cm[i][i] for i in range(k))
    total = len(y_true)
    precision, recall, f1 = [], [], []
    for c in range(k):
        col = sum(cm[r][c] for r in range(k))
        row = sum(cm[c])
        p = cm[c][c] / col if col else 0.0
        r = cm[c][c] / row if row else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
    return cm, correct / total, precision, recall, f1


class TestConfusionMatrix:
    def test_counts_by_hand(self):
        cm = metrics.confusion_matrix([0, 0, 1, 1, 2], [0, 1, 1, 1, 0], 3)
        np.testing.assert_array_equal(cm, [[1, 1, 0], [0, 2, 0], [1, 0, 0]])

    def test_rows_are_truth_columns_are_prediction(self):
        cm = metrics.confusion_matrix([1], [0], 2)
        assert cm[1, 0] == 1
        assert cm[0, 1] == 0

    def test_validation(self):
        with pytest.raises(ShapeError):
            metrics.confusion_matrix([0, 1], [0], 2)
        with pytest.raises(ShapeError):
            metrics.confusion_matrix([0, 2], [0, 0], 2)
        with pytest.raises(ShapeError):
            metrics.confusion_matrix([0, -1], [0, 0], 2)


class TestAgainstTallyOracle:
    def test_thousand_random_pairs_agree_to_1e12(self):
        rng = np.random.default_rng(0)
        y_true = rng.integers(0, 10, size=1000)
        y_pred = rng.integers(0, 10, size=1000)
        report = metrics.summarize(y_true, y_pred, 10)
        cm, acc, precision, recall, f1 = tally_oracle(y_true, y_pred, 10)
        np.testing.assert_array_equal(report.confusion, cm)
        assert abs(report.accuracy - acc) <= 1e-12
        for c in range(10):
            assert abs(report.precision[c] - precision[c]) <= 1e-12
            assert abs(report.recall[c] - recall[c]) <= 1e-12
            assert abs(report.f1[c] - f1[c]) <= 1e-12
        assert abs(report.macro_precision - np.mean(precision)) <= 1e-12
        assert abs(report.macro_recall - np.mean(recall)) <= 1e-12
        assert abs(report.macro_f1 - np.mean(f1)) <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 6), st.integers(1, 60), st.integers(0, 2**31))
    def test_random_cases_agree(self, k, n, seed):
        rng = np.random.default_rng(seed)
        y_true = rng.integers(0, k, size=n)
        y_pred = rng.integers(0, k, size=n)
        report = metrics.summarize(y_true, y_pred, k)
        cm, acc, precision, recall, f1 = tally_oracle(y_true, y_pred, k)
        np.testing.assert_array_equal(report.confusion, cm)
        assert abs(report.accuracy - acc) <= 1e-12
        np.testing.assert_allclose(report.precision, precision, atol=1e-12)
        np.testing.assert_allclose(report.recall, recall, atol=1e-12)
        np.testing.assert_allclose(report.f1, f1, atol=1e-12)
        assert 0.0 <= report.macro_f1 <= 1.0
        assert report.confusion.sum() == n


class TestKnownBinaryCase:
    def test_two_one_one_two(self):
        # confusion [[2,1],[1,2]]: every class-0 metric equals 2/3
        y_true = [0, 0, 0, 1, 1, 1]
        y_pred = [0, 0, 1, 0, 1, 1]
        report = metrics.summarize(y_true, y_pred, 2)
        np.testing.assert_array_equal(report.confusion, [[2, 1], [1, 2]])
        assert report.precision[0] == pytest.approx(2 / 3, abs=1e-15)
        assert report.recall[0] == pytest.approx(2 / 3, abs=1e-15)
        assert report.f1[0] == pytest.approx(2 / 3, abs=1e-15)


class TestDegenerateClasses:
    def test_never_predicted_class_flagged_with_zero_precision(self):
        report = metrics.summarize([0, 1, 2], [0, 1, 1], 3)
        assert report.precision[2] == 0.0
        assert report.never_predicted == [2]

    def test_absent_class_flagged_with_zero_recall(self):
        report = metrics.summarize([0, 0, 1], [0, 2, 1], 3)
        assert report.recall[2] == 0.0
        assert report.never_true == [2]

    def test_empty_matrix_accuracy_zero(self):
        assert metrics.accuracy(np.zeros((3, 3), dtype=np.int64)) == 0.0


class TestEvaluate:
    def test_predictions_come_from_argmax(self):
        # identity-weight softmax layer: prediction equals input argmax
        net = nn.Network(
            [nn.dense(3, 3, "softmax", weights=np.eye(3) * 5,
                      bias=np.zeros(3))],
            (3,),
        )
        x = np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0], [1.0, 0, 0]])
        y = np.array([0, 1, 2, 1])  # last one is a deliberate miss
        report = metrics.evaluate(net, x, y)
        assert report.accuracy == pytest.approx(0.75)
        assert report.num_samples == 4
        np.testing.assert_array_equal(
            report.confusion, [[1, 0, 0], [1, 1, 0], [0, 0, 1]]
        )

    def test_image_inputs_flattened_for_mlp(self):
        net = nn.build_mlp([16, 8, 3], seed=0)
        x = np.random.default_rng(0).normal(size=(5, 1, 4, 4))
        y = np.zeros(5, dtype=np.int64)
        report = metrics.evaluate(net, x, y)
        assert report.num_samples == 5


class TestReportSerialisation:
    def test_to_dict_keys_and_types(self):
        report = metrics.summarize([0, 1], [0, 1], 2)
        d = report.to_dict()
        assert d["accuracy"] == 1.0
        assert d["num_samples"] == 2
        assert len(d["per_class"]) == 2
        assert d["confusion_matrix"] == [[1, 0], [0, 1]]
        assert d["per_class"][0]["f1"] == 1.0

    def test_text_mentions_flagged_classes(self):
        report = metrics.summarize([0, 1, 2], [0, 1, 1], 3)
        text = report.text()
        assert "accuracy" in text
        assert "never predicted" in text
        assert "2" in text
