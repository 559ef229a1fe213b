"""Thresholded confusion metrics and ROC AUC.

AUC is computed by the rank (Mann-Whitney) formulation with midranks for
ties, which equals (concordant + 0.5 * tied) / (n_pos * n_neg). A
trapezoidal ROC integration is provided as an independent route; the two
agree to floating-point accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int

    METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "auc")

    def as_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in self.METRIC_NAMES}


def _split_scores(pairs) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray([int(lab) for lab, _ in pairs])
    scores = np.asarray([float(s) for _, s in pairs], dtype=np.float64)
    return labels, scores


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks, ties receiving the mean of their rank range."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(labels: Sequence[int], scores: Sequence[float]) -> float:
    """Probability a random positive outranks a random negative (ties half)."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one example of each class")
    ranks = _midranks(s)
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_curve(labels: Sequence[int], scores: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """(FPR, TPR) points swept over the distinct score thresholds, descending."""
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC needs at least one example of each class")
    order = np.argsort(-s, kind="mergesort")
    sorted_y = y[order]
    sorted_s = s[order]
    tp = np.cumsum(sorted_y == 1)
    fp = np.cumsum(sorted_y == 0)
    # Keep only the last index of each tied-score run.
    last_of_run = np.ones(s.size, dtype=bool)
    last_of_run[:-1] = sorted_s[:-1] != sorted_s[1:]
    tpr = np.concatenate([[0.0], tp[last_of_run] / n_pos])
    fpr = np.concatenate([[0.0], fp[last_of_run] / n_neg])
    return fpr, tpr


def roc_auc_trapezoid(labels: Sequence[int], scores: Sequence[float]) -> float:
    """AUC by trapezoidal integration of the ROC curve (independent route)."""
    fpr, tpr = roc_curve(labels, scores)
    widths = np.diff(fpr)
    heights = 0.5 * (tpr[1:] + tpr[:-1])
    return float(np.sum(widths * heights))


def evaluate_metrics(
    scored: Iterable[tuple[int, float]],
    threshold: float = 0.5,
) -> Metrics:
    """Confusion metrics at `threshold` (predict fraud when p >= threshold) plus AUC."""
    pairs = list(scored)
    labels, scores = _split_scores(pairs)
    predicted = scores >= threshold
    actual = labels == 1
    tp = int(np.sum(predicted & actual))
    fp = int(np.sum(predicted & ~actual))
    tn = int(np.sum(~predicted & ~actual))
    fn = int(np.sum(~predicted & actual))
    n = len(pairs)
    accuracy = (tp + tn) / n if n else 0.0
    precision = tp / (tp + fp) if (tp + fp) else 0.0
    recall = tp / (tp + fn) if (tp + fn) else 0.0
    f1 = (2 * precision * recall / (precision + recall)) if (precision + recall) else 0.0
    auc = roc_auc(labels, scores)
    return Metrics(accuracy, precision, recall, f1, auc, tp, fp, tn, fn)
