"""Borderline-SMOTE over a brute-force Euclidean neighbor index.

Minority samples are partitioned into safe / danger / noise sets by counting
majority-class members among their m nearest neighbors in the whole dataset;
synthesis interpolates danger points toward their nearest minority
neighbors. Features are assumed to be commensurately scaled (the pipeline
min-max scales before balancing); this is documented, not enforced.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DataError
from .rng import Prng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SmoteConfig:
    m_neighbors: int = 5  # neighborhood size for danger detection
    k_neighbors: int = 5  # candidate pool size for synthesis partners
    variant: str = "borderline1"
    target: str = "equalize"
    seed: int = 0

    def __post_init__(self):
        if self.m_neighbors < 1 or self.k_neighbors < 1:
            raise DataError("m_neighbors and k_neighbors must be >= 1")
        if self.variant != "borderline1":
            raise DataError(f"unsupported SMOTE variant {self.variant!r}")
        if self.target != "equalize":
            raise DataError(f"unsupported SMOTE target {self.target!r}")


@dataclass(frozen=True)
class MinorityPartition:
    """Disjoint index sets over the minority subset (positions, not dataset
    indices); their union covers every minority sample."""

    safe: tuple[int, ...]
    danger: tuple[int, ...]
    noise: tuple[int, ...]


class NeighborIndex:
    """Brute-force Euclidean index over a fixed reference matrix."""

    def __init__(self, points: np.ndarray):
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2:
            raise DataError(f"reference matrix must be 2-D, got shape {points.shape}")
        if not np.isfinite(points).all():
            raise DataError("reference matrix contains non-finite entries")
        self.points = points

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _neighbors_excluding(index: NeighborIndex, point: np.ndarray, k: int,
                         exclude: int | None) -> np.ndarray:
    """k nearest reference indices, ascending by squared Euclidean distance,
    ties broken by ascending index; `exclude` masks one reference row.

    Squared distances accumulate feature by feature, so exact ties land on
    bit-identical values regardless of how a verifier associates the sum.
    """
    diff = index.points - point
    sq = np.zeros(index.n_points)
    for j in range(index.dim):
        sq += diff[:, j] * diff[:, j]
    if exclude is not None:
        sq = sq.copy()
        sq[exclude] = np.inf
    order = np.argsort(sq, kind="stable")  # stable sort = index tie-break
    return order[:k]


def knn_query(index: NeighborIndex, point: np.ndarray, k: int,
              exclude_self: bool = False) -> np.ndarray:
    """The k nearest reference points to `point`.

    With exclude_self=True the query must itself be a reference row; the
    lowest-index exact match is excluded (other rows at distance zero, e.g.
    duplicates, still count as neighbors). Read-only over the index, so
    concurrent queries are safe.
    """
    point = np.asarray(point, dtype=np.float64).reshape(-1)
    if point.shape[0] != index.dim:
        raise DataError(f"query has dimension {point.shape[0]}, index has {index.dim}")
    available = index.n_points - (1 if exclude_self else 0)
    if k > available:
        raise DataError(f"k={k} exceeds the {available} available reference points")
    exclude = None
    if exclude_self:
        matches = np.flatnonzero((index.points == point).all(axis=1))
        if matches.size == 0:
            raise DataError("exclude_self requires the query to be a reference row")
        exclude = int(matches[0])
    return _neighbors_excluding(index, point, k, exclude)


def partition_minority(ds: Dataset, cfg: SmoteConfig) -> MinorityPartition:
    """Classify each minority sample by its m-neighborhood in the whole
    dataset: all majority -> noise, at least half -> danger, else safe."""
    minority_label = _minority_label(ds)
    if cfg.m_neighbors > ds.n_samples - 1:
        raise DataError(
            f"m_neighbors={cfg.m_neighbors} exceeds n_samples-1={ds.n_samples - 1}"
        )
    index = NeighborIndex(ds.features)
    minority_rows = np.flatnonzero(ds.labels == minority_label)
    safe, danger, noise = [], [], []
    m = cfg.m_neighbors
    for pos, row in enumerate(minority_rows):
        nbr = _neighbors_excluding(index, ds.features[row], m, exclude=int(row))
        n_majority = int(np.sum(ds.labels[nbr] != minority_label))
        if n_majority == m:
            noise.append(pos)
        elif 2 * n_majority >= m:
            danger.append(pos)
        else:
            safe.append(pos)
    return MinorityPartition(safe=tuple(safe), danger=tuple(danger), noise=tuple(noise))


def borderline_smote(ds: Dataset, cfg: SmoteConfig) -> Dataset:
    """Equalize class counts by synthesizing minority samples near the border.

    The output keeps every original row unchanged and in order, followed by
    the synthetic rows. Synthesis is deterministic given cfg.seed; the stream
    protocol per synthetic sample is: one `integer(k)` draw choosing the
    partner among the k nearest minority neighbors, then one `uniform()` draw
    for the interpolation coefficient r in [0, 1), giving p + r * (q - p).
    Deficit is spread round-robin over the danger set in ascending row order.
    """
    counts = ds.class_counts()
    if counts["positive"] == 0 or counts["negative"] == 0:
        raise DataError("both classes must be present before resampling")
    deficit = abs(counts["positive"] - counts["negative"])
    if deficit == 0:
        return Dataset(ds.features.copy(), ds.labels.copy(), list(ds.feature_names))

    minority_label = _minority_label(ds)
    minority_rows = np.flatnonzero(ds.labels == minority_label)
    if minority_rows.size < 2:
        raise DataError("minority class needs at least 2 samples to interpolate")

    partition = partition_minority(ds, cfg)
    base_positions = list(partition.danger)
    if not base_positions:
        logger.warning(
            "danger set is empty; falling back to plain SMOTE over all %d minority samples",
            minority_rows.size,
        )
        base_positions = list(range(minority_rows.size))

    k = min(cfg.k_neighbors, minority_rows.size - 1)
    minority_index = NeighborIndex(ds.features[minority_rows])
    partner_lists = {
        pos: _neighbors_excluding(minority_index, minority_index.points[pos], k, exclude=pos)
        for pos in base_positions
    }

    rng = Prng(cfg.seed)
    synthetic = np.empty((deficit, ds.n_features), dtype=np.float64)
    for i in range(deficit):
        pos = base_positions[i % len(base_positions)]
        partners = partner_lists[pos]
        q_pos = partners[rng.integer(k)]
        r = rng.uniform()
        p = minority_index.points[pos]
        q = minority_index.points[q_pos]
        synthetic[i] = p + r * (q - p)

    features = np.vstack([ds.features, synthetic])
    labels = np.concatenate(
        [ds.labels, np.full(deficit, minority_label, dtype=np.int8)]
    )
    return Dataset(features=features, labels=labels, feature_names=list(ds.feature_names))


def _minority_label(ds: Dataset) -> int:
    counts = ds.class_counts()
    if counts["positive"] == 0 or counts["negative"] == 0:
        raise DataError("both classes must be present")
    return 1 if counts["positive"] < counts["negative"] else 0
