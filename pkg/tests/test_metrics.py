"""Classification metrics against hand computations and a pair-counting
AUC oracle."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import auc_by_pair_counting
from runlens.engine.metrics import (
    accuracy,
    auc,
    confusion_matrix,
    precision_recall,
    roc_auc,
    roc_curve,
)


def test_accuracy_by_hand():
    assert accuracy(np.array([0, 1, 1, 0]), np.array([0, 1, 1, 1])) == 0.75
    assert accuracy(np.array([1, 1]), np.array([1, 1])) == 1.0


def test_confusion_matrix_by_hand():
    y_true = np.array([0, 1, 1, 0])
    y_pred = np.array([0, 1, 1, 1])
    conf = confusion_matrix(y_true, y_pred, 2)
    np.testing.assert_array_equal(conf, [[1, 1], [0, 2]])


def test_precision_recall_by_hand():
    conf = np.array([[1, 1], [0, 2]])
    precision, recall = precision_recall(conf)
    assert precision[1] == pytest.approx(2 / 3)
    assert recall[1] == 1.0
    assert precision[0] == 1.0
    assert recall[0] == 0.5


def test_precision_recall_empty_classes_are_zero():
    conf = np.array([[3, 0], [0, 0]])
    precision, recall = precision_recall(conf)
    assert precision[1] == 0.0
    assert recall[1] == 0.0


def test_auc_by_hand():
    y = np.array([0, 0, 1, 1])
    scores = np.array([0.1, 0.4, 0.35, 0.8])
    assert roc_auc(y, scores) == pytest.approx(0.75)
    assert roc_auc(y, np.array([0.1, 0.2, 0.8, 0.9])) == 1.0
    assert roc_auc(y, np.array([0.9, 0.8, 0.2, 0.1])) == 0.0


def test_auc_with_ties_counts_half():
    y = np.array([0, 1])
    scores = np.array([0.5, 0.5])
    assert roc_auc(y, scores) == pytest.approx(0.5)


def test_auc_single_class_is_undefined():
    assert roc_auc(np.array([1, 1, 1]), np.array([0.1, 0.2, 0.3])) is None


def test_roc_curve_shape_and_endpoints():
    y = np.array([0, 0, 1, 1, 1])
    scores = np.array([0.2, 0.6, 0.3, 0.7, 0.9])
    fpr, tpr, thresholds = roc_curve(y, scores)
    assert fpr[0] == 0.0 and tpr[0] == 0.0
    assert fpr[-1] == 1.0 and tpr[-1] == 1.0
    assert (np.diff(fpr) >= 0).all()
    assert (np.diff(tpr) >= 0).all()
    assert len(fpr) == len(tpr) == len(thresholds)
    assert auc(fpr, tpr) == pytest.approx(roc_auc(y, scores))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 1),
                          st.floats(0, 1, allow_nan=False, width=32)),
                min_size=4, max_size=40))
def test_roc_auc_matches_pair_counting_oracle(pairs):
    y = np.array([p[0] for p in pairs])
    scores = np.array([p[1] for p in pairs], dtype=float)
    if len(set(y)) < 2:
        assert roc_auc(y, scores) is None
        return
    assert roc_auc(y, scores) == pytest.approx(
        auc_by_pair_counting(list(y), list(scores)), abs=1e-9)


def test_performance_report_fields(tiny_registry):
    bundle = tiny_registry.bundle("tiny")
    report = bundle.report("a")
    doc = report.to_json()
    assert set(doc) == {"train_accuracy", "validation_accuracy", "classes",
                        "confusion", "roc"}
    assert len(doc["classes"]) == 2
    conf = np.array(doc["confusion"])
    assert conf.shape == (2, 2)
    # confusion totals equal the validation rows
    fp = bundle.fitted("a")
    assert conf.sum() == fp.validation_data().n_rows
    for entry in doc["classes"]:
        assert 0.0 <= entry["precision"] <= 1.0
        assert 0.0 <= entry["recall"] <= 1.0
        if entry["auc"] is not None:
            assert 0.0 <= entry["auc"] <= 1.0
