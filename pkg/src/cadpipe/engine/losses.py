"""Loss functions returning (value, gradient w.r.t. predictions).

Both losses average over the batch axis. Binary cross entropy sums over
output units within a sample and clamps predictions to [eps, 1 - eps] before
the logs, so the value is finite for any prediction in [0, 1].
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError

BCE_EPS = 1e-7


def binary_cross_entropy(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if pred.shape != target.shape:
        raise DataError(f"prediction shape {pred.shape} != target shape {target.shape}")
    batch = pred.shape[0]
    p = np.clip(pred, BCE_EPS, 1.0 - BCE_EPS)
    loss = float(-np.sum(target * np.log(p) + (1.0 - target) * np.log1p(-p)) / batch)
    inside = (pred > BCE_EPS) & (pred < 1.0 - BCE_EPS)
    dpred = (p - target) / (p * (1.0 - p)) * inside / batch
    return loss, dpred


def mean_squared_error(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    if pred.shape != target.shape:
        raise DataError(f"prediction shape {pred.shape} != target shape {target.shape}")
    diff = pred - target
    loss = float(np.mean(diff * diff))
    dpred = 2.0 * diff / diff.size
    return loss, dpred


LOSSES = {
    "binary_cross_entropy": binary_cross_entropy,
    "mean_squared_error": mean_squared_error,
}
