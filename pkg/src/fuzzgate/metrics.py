"""Binary-classification metrics, ROC curves and AUC.

Undefined metrics (a precision with no predicted positives, say) are
reported as ``None`` rather than silently coerced to zero.  AUC is the
rank statistic: the probability that a positive outscores a negative,
with ties contributing one half.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class ClassificationMetrics:
    counts: ConfusionCounts
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass(frozen=True)
class RocCurve:
    points: tuple[tuple[float, float], ...]  # (fpr, tpr), monotone, (0,0) .. (1,1)
    auc: float


def confusion_from_predictions(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionCounts:
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    return ConfusionCounts(
        tp=int(np.sum(y_pred & y_true)),
        fp=int(np.sum(y_pred & ~y_true)),
        tn=int(np.sum(~y_pred & ~y_true)),
        fn=int(np.sum(~y_pred & y_true)),
    )


def classification_metrics(counts: ConfusionCounts) -> ClassificationMetrics:
    n = counts.total
    accuracy = (counts.tp + counts.tn) / n if n > 0 else None
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp > 0 else None
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn > 0 else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return ClassificationMetrics(counts, accuracy, precision, recall, f1)


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank range."""
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def rank_auc(y_true: np.ndarray, scores: np.ndarray) -> float:
    """AUC as a rank statistic; ties count half.

    Raises ``ValueError`` unless both classes are present.
    """
    y_true = np.asarray(y_true).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    n_pos = int(np.sum(y_true))
    n_neg = len(y_true) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    ranks = _average_ranks(scores)
    rank_sum_pos = float(np.sum(ranks[y_true]))
    u = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def roc_curve(y_true: np.ndarray, scores: np.ndarray) -> RocCurve:
    """ROC points swept over descending score thresholds, plus rank AUC."""
    y_true = np.asarray(y_true).astype(bool)
    scores = np.asarray(scores, dtype=np.float64)
    auc = rank_auc(y_true, scores)
    n_pos = int(np.sum(y_true))
    n_neg = len(y_true) - n_pos

    order = np.argsort(-scores, kind="stable")
    sorted_y = y_true[order]
    sorted_scores = scores[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    for i in range(len(sorted_y)):
        if sorted_y[i]:
            tp += 1
        else:
            fp += 1
        is_threshold_edge = i + 1 == len(sorted_y) or sorted_scores[i + 1] != sorted_scores[i]
        if is_threshold_edge:
            points.append((fp / n_neg, tp / n_pos))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return RocCurve(points=tuple(points), auc=auc)


def evaluate(model, test) -> dict:
    """Score *model* on a test :class:`~fuzzgate.features.FeatureMatrix`.

    Returns confusion counts, the four headline metrics and the ROC curve.
    The model only needs a ``predict_proba_batch`` method.
    """
    if len(test.y) == 0:
        raise ValueError("test set is empty")
    scores = model.predict_proba_batch(test.X)
    preds = scores >= 0.5
    counts = confusion_from_predictions(test.y, preds)
    report = classification_metrics(counts)
    try:
        roc = roc_curve(test.y, scores)
    except ValueError:
        roc = None
    return {
        "counts": counts,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "roc": roc,
        "auc": roc.auc if roc is not None else None,
    }
