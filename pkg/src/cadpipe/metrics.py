"""Confusion-based metrics and rank-based ROC AUC.

Ratios with a 0/0 numerator and denominator are defined as 0 and flagged;
ROC AUC is the Mann-Whitney statistic (ties count one half), computed from
sorted tie groups so it matches pairwise enumeration exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion(labels: np.ndarray, predictions: np.ndarray) -> ConfusionCounts:
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise DataError(
            f"labels length {labels.shape} != predictions length {predictions.shape}"
        )
    pos = labels == 1
    pred_pos = predictions == 1
    return ConfusionCounts(
        tp=int(np.sum(pos & pred_pos)),
        fp=int(np.sum(~pos & pred_pos)),
        tn=int(np.sum(~pos & ~pred_pos)),
        fn=int(np.sum(pos & ~pred_pos)),
    )


def metrics_from_confusion(c: ConfusionCounts) -> tuple[dict[str, float], list[str]]:
    """(recall, precision, f1, accuracy) plus flags naming any 0/0 ratios."""
    flags: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            flags.append(f"{name}: 0/0 defined as 0")
            return 0.0
        return num / den

    recall = ratio(c.tp, c.tp + c.fn, "recall")
    precision = ratio(c.tp, c.tp + c.fp, "precision")
    if precision == 0.0 and recall == 0.0:
        f1 = 0.0
        flags.append("f1: 0/0 defined as 0")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    accuracy = ratio(c.tp + c.tn, c.total, "accuracy")
    return {"recall": recall, "precision": precision, "f1": f1, "accuracy": accuracy}, flags


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """P(random positive outscores random negative), ties worth one half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise DataError("scores and labels must have equal length")
    n_pos = int(np.sum(labels == 1))
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC AUC needs both classes present")
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    y = labels[order]
    numer = 0.0  # wins + 0.5 * ties, summed over positive-negative pairs
    neg_below = 0
    i = 0
    n = s.size
    while i < n:
        j = i
        while j < n and s[j] == s[i]:
            j += 1
        group_pos = int(np.sum(y[i:j] == 1))
        group_neg = (j - i) - group_pos
        numer += group_pos * neg_below + 0.5 * group_pos * group_neg
        neg_below += group_neg
        i = j
    return numer / (n_pos * n_neg)


def roc_auc_pairwise(scores: np.ndarray, labels: np.ndarray) -> float:
    """Brute-force pairwise oracle for roc_auc (kept independent on purpose)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels != 1]
    if pos.size == 0 or neg.size == 0:
        raise DataError("ROC AUC needs both classes present")
    wins = np.sum(pos[:, None] > neg[None, :])
    ties = np.sum(pos[:, None] == neg[None, :])
    return float((wins + 0.5 * ties) / (pos.size * neg.size))
