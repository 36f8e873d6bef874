"""Classification metrics computed from first principles.

ROC curves come from a descending threshold sweep over predicted scores; the
AUC is the trapezoidal area under that curve, which for finite samples equals
the pairwise ranking statistic (ties counted half).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .pipeline import FittedPipeline

PREDICT_BATCH_ROWS = 1000
PREDICT_REPEATS = 5


def accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    if len(y_true) == 0:
        return 0.0
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    """Counts with true classes as rows and predicted classes as columns."""
    m = np.zeros((n_classes, n_classes), dtype=int)
    for t, p in zip(np.asarray(y_true), np.asarray(y_pred)):
        m[t, p] += 1
    return m


def precision_recall(conf: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-class precision and recall; empty denominators yield 0."""
    tp = np.diag(conf).astype(float)
    pred_total = conf.sum(axis=0).astype(float)
    true_total = conf.sum(axis=1).astype(float)
    precision = np.divide(tp, pred_total, out=np.zeros_like(tp), where=pred_total > 0)
    recall = np.divide(tp, true_total, out=np.zeros_like(tp), where=true_total > 0)
    return precision, recall


def roc_curve(y_true: np.ndarray, scores: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-vs-rest ROC points (fpr, tpr, thresholds), thresholds descending.

    ``y_true`` is binary membership of the positive class. The sweep places
    one point after each distinct score value, starting at (0, 0).
    """
    y = np.asarray(y_true, dtype=bool)
    s = np.asarray(scores, dtype=float)
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    tp = np.cumsum(y_sorted)
    fp = np.cumsum(~y_sorted)
    distinct = np.nonzero(np.diff(s_sorted))[0]
    cuts = np.concatenate([distinct, [len(s_sorted) - 1]])
    tpr = tp[cuts] / n_pos if n_pos else np.zeros(len(cuts))
    fpr = fp[cuts] / n_neg if n_neg else np.zeros(len(cuts))
    return (np.concatenate([[0.0], fpr]),
            np.concatenate([[0.0], tpr]),
            np.concatenate([[np.inf], s_sorted[cuts]]))


_trapezoid = getattr(np, "trapezoid", None) or np.trapz


def auc(fpr: np.ndarray, tpr: np.ndarray) -> float:
    return float(_trapezoid(tpr, fpr))


def roc_auc(y_true: np.ndarray, scores: np.ndarray) -> Optional[float]:
    y = np.asarray(y_true, dtype=bool)
    if y.all() or not y.any():
        return None  # undefined with a single class present
    fpr, tpr, _ = roc_curve(y, scores)
    return auc(fpr, tpr)


@dataclass
class PerformanceReport:
    # Deliberately no wall times here: reports must be a pure function of
    # (run, seed) so identical requests render byte-identical responses.
    # Measured durations live in the run file's candidate metadata.
    train_accuracy: float
    validation_accuracy: float
    precision: np.ndarray
    recall: np.ndarray
    support: np.ndarray
    confusion: np.ndarray
    roc: list[dict]
    auc_per_class: list[Optional[float]]
    class_labels: tuple[str, ...]

    def to_json(self) -> dict:
        return {
            "train_accuracy": self.train_accuracy,
            "validation_accuracy": self.validation_accuracy,
            "classes": [
                {"label": lbl,
                 "precision": float(self.precision[i]),
                 "recall": float(self.recall[i]),
                 "support": int(self.support[i]),
                 "auc": self.auc_per_class[i]}
                for i, lbl in enumerate(self.class_labels)],
            "confusion": self.confusion.tolist(),
            "roc": self.roc,
        }


def measure_predict_seconds(fp: FittedPipeline, ds) -> float:
    """Mean wall time to score one 1000-row batch, over 5 repeats."""
    idx = np.resize(np.arange(ds.n_rows), PREDICT_BATCH_ROWS)
    batch = ds.take(idx)
    times = []
    for _ in range(PREDICT_REPEATS):
        t0 = time.perf_counter()
        fp.predict_proba(batch)
        times.append(time.perf_counter() - t0)
    return float(np.mean(times))


def performance_report(fp: FittedPipeline) -> PerformanceReport:
    """Refit metrics: accuracy, per-class precision/recall, confusion, ROC."""
    k = fp.n_classes
    train = fp.train_data()
    val = fp.validation_data()
    train_pred = fp.predict_labels(train)
    val_proba = fp.predict_proba(val)
    val_pred = np.argmax(val_proba, axis=1)
    conf = confusion_matrix(val.y, val_pred, k)
    precision, recall = precision_recall(conf)
    roc = []
    aucs: list[Optional[float]] = []
    for c in range(k):
        member = val.y == c
        if member.any() and not member.all():
            fpr, tpr, thr = roc_curve(member, val_proba[:, c])
            roc.append({"label": fp.class_labels[c],
                        "fpr": fpr.tolist(), "tpr": tpr.tolist(),
                        "thresholds": [None if np.isinf(t) else float(t) for t in thr]})
            aucs.append(auc(fpr, tpr))
        else:
            roc.append({"label": fp.class_labels[c], "fpr": [], "tpr": [],
                        "thresholds": []})
            aucs.append(None)
    return PerformanceReport(
        train_accuracy=accuracy(train.y, train_pred),
        validation_accuracy=accuracy(val.y, val_pred),
        precision=precision,
        recall=recall,
        support=conf.sum(axis=1),
        confusion=conf,
        roc=roc,
        auc_per_class=aucs,
        class_labels=fp.class_labels,
    )
