"""K-fold splitting and the cross-validation harness.

Folds are stratified by class by default so every test fold contains both
classes and ROC AUC is always defined; a flag restores plain splitting.
Fold f trains with the model seed (plan seed XOR f), so folds are
independent but the whole run is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classifiers import Classifier
from .dataset import Dataset
from .errors import DataError
from .metrics import confusion, metrics_from_confusion, roc_auc
from .rng import Prng

METRIC_KEYS = ("recall", "precision", "f1", "accuracy", "roc_auc")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    folds: tuple[np.ndarray, ...]
    seed: int
    n: int

    def __post_init__(self):
        if self.k != len(self.folds):
            raise DataError("fold count does not match k")
        sizes = [f.size for f in self.folds]
        if max(sizes) - min(sizes) > 1:
            raise DataError(f"fold sizes may differ by at most 1, got {sizes}")
        merged = np.concatenate(self.folds)
        if merged.size != self.n or not np.array_equal(np.sort(merged), np.arange(self.n)):
            raise DataError("folds must partition 0..n-1 disjointly")

    def train_indices(self, fold: int) -> np.ndarray:
        others = [f for i, f in enumerate(self.folds) if i != fold]
        return np.sort(np.concatenate(others))


def kfold_split(n: int, k: int, seed: int) -> FoldPlan:
    """Shuffle 0..n-1 and deal k contiguous chunks; the first n % k folds
    take the extra sample."""
    _check_kn(k, n)
    order = Prng(seed).permutation(n)
    base = n // k
    extra = n % k
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(order[start:start + size]))
        start += size
    return FoldPlan(k=k, folds=tuple(folds), seed=seed, n=n)


def stratified_kfold_split(labels: np.ndarray, k: int, seed: int) -> FoldPlan:
    """Class-proportional folds: each class is shuffled and dealt across the
    k folds, extras going to the currently smallest folds, so overall sizes
    still differ by at most one."""
    labels = np.asarray(labels)
    n = labels.size
    _check_kn(k, n)
    rng = Prng(seed)
    buckets: list[list[np.ndarray]] = [[] for _ in range(k)]
    totals = np.zeros(k, dtype=np.int64)
    for cls in (0, 1):
        rows = np.flatnonzero(labels == cls)
        if rows.size == 0:
            continue
        order = rows[rng.permutation(rows.size)]
        base = rows.size // k
        extra = rows.size % k
        # deterministically hand the remainder to the least-filled folds
        receive_extra = np.argsort(totals, kind="stable")[:extra]
        sizes = np.full(k, base, dtype=np.int64)
        sizes[receive_extra] += 1
        start = 0
        for i in range(k):
            buckets[i].append(order[start:start + sizes[i]])
            start += sizes[i]
        totals += sizes
    folds = tuple(np.sort(np.concatenate(parts)) for parts in buckets)
    return FoldPlan(k=k, folds=folds, seed=seed, n=n)


def _check_kn(k: int, n: int) -> None:
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    if k > n:
        raise DataError(f"k={k} exceeds the {n} available samples")


@dataclass
class MetricsReport:
    """Per-fold and aggregate metrics for one model."""

    model: str
    fold_metrics: list[dict[str, float]]  # positive-class metrics per fold
    fold_macro: list[dict[str, float]]  # macro-averaged extras per fold
    flags: list[str]

    @property
    def aggregate(self) -> dict[str, float]:
        return {
            key: float(np.mean([fm[key] for fm in self.fold_metrics]))
            for key in METRIC_KEYS
        }

    @property
    def aggregate_macro(self) -> dict[str, float]:
        keys = self.fold_macro[0].keys()
        return {key: float(np.mean([fm[key] for fm in self.fold_macro])) for key in keys}

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "folds": [
                {"fold": i, **fm, "macro": self.fold_macro[i]}
                for i, fm in enumerate(self.fold_metrics)
            ],
            "aggregate": self.aggregate,
            "aggregate_macro": self.aggregate_macro,
            "flags": self.flags,
        }


def evaluate_model(
    model_factory: Callable[[], Classifier],
    dataset: Dataset,
    plan: FoldPlan,
    threshold: float = 0.5,
) -> MetricsReport:
    """Fit on k-1 folds, score the held-out fold, for every fold; aggregate
    by unweighted mean. The factory must return a fresh unfitted model."""
    if plan.n != dataset.n_samples:
        raise DataError(
            f"fold plan covers {plan.n} samples, dataset has {dataset.n_samples}"
        )
    fold_metrics: list[dict[str, float]] = []
    fold_macro: list[dict[str, float]] = []
    flags: list[str] = []
    name = None
    for i, test_idx in enumerate(plan.folds):
        test_labels = dataset.labels[test_idx]
        if len(np.unique(test_labels)) < 2:
            raise DataError(f"fold {i} contains a single class; stratify the split")
        train = dataset.subset(plan.train_indices(i))
        model = model_factory()
        name = name or type(model).__name__
        model.fit(train, seed=plan.seed ^ i)
        test_features = dataset.features[test_idx]
        scores = np.asarray(model.predict_scores(test_features), dtype=np.float64)
        if scores.min() < 0.0 or scores.max() > 1.0 or not np.isfinite(scores).all():
            raise DataError(f"fold {i}: scores outside [0, 1]")
        predicted = (scores >= threshold).astype(np.int8)
        pos_metrics, fold_flags = metrics_from_confusion(confusion(test_labels, predicted))
        pos_metrics["roc_auc"] = roc_auc(scores, test_labels)
        fold_metrics.append(pos_metrics)
        fold_macro.append(macro_metrics(test_labels, predicted))
        flags.extend(f"fold {i}: {flag}" for flag in fold_flags)
    return MetricsReport(
        model=name or "model",
        fold_metrics=fold_metrics,
        fold_macro=fold_macro,
        flags=flags,
    )


def macro_metrics(labels: np.ndarray, predicted: np.ndarray) -> dict[str, float]:
    """Macro average of per-class precision/recall/f1 (positive + negative)."""
    pos, _ = metrics_from_confusion(confusion(labels, predicted))
    neg, _ = metrics_from_confusion(confusion(1 - labels, 1 - predicted))
    return {
        "recall_macro": (pos["recall"] + neg["recall"]) / 2.0,
        "precision_macro": (pos["precision"] + neg["precision"]) / 2.0,
        "f1_macro": (pos["f1"] + neg["f1"]) / 2.0,
    }


def format_report_table(rows: Sequence[dict]) -> str:
    """Aligned text table of model results for humans; values are percent
    with two decimals. Each row: {"model": ..., metric keys..., "source"}."""
    header = ["model", *METRIC_KEYS, "source"]
    table = [header]
    for row in rows:
        table.append([
            str(row["model"]),
            *(f"{row[key]:.2f}" for key in METRIC_KEYS),
            str(row.get("source", "evaluated")),
        ])
    widths = [max(len(line[i]) for line in table) for i in range(len(header))]
    lines = []
    for j, line in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip())
        if j == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(header))))
    return "\n".join(lines) + "\n"
