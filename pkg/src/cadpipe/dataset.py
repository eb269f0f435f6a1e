"""CSV ingestion: parsing, cleaning, encoding and min-max scaling.

All operations are pure functions over immutable inputs; none of them
reorders or drops sample rows (columns may be dropped by cleaning).
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .schema import DatasetSchema

logger = logging.getLogger(__name__)

POSITIVE = 1
NEGATIVE = 0
LABEL_TEXT = {POSITIVE: "positive", NEGATIVE: "negative"}

# Row provenance tags used by the resampling and augmentation stages.
PROV_ORIGINAL = "original"
PROV_SMOTE = "synthetic_smote"
PROV_RECONSTRUCTION = "reconstruction"


@dataclass(frozen=True)
class RawTable:
    """A parsed CSV: header plus text cells, every row header-length long."""

    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def column(self, name: str) -> list[str]:
        j = self.header.index(name)
        return [row[j] for row in self.rows]

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass
class Dataset:
    """Numeric feature matrix with binary labels (1 = positive class)."""

    features: np.ndarray  # (n_samples, n_features) float64
    labels: np.ndarray  # (n_samples,) int8 in {0, 1}
    feature_names: list[str]

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        if self.features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise DataError(
                f"labels length {self.labels.shape} does not match "
                f"{self.features.shape[0]} samples"
            )
        if len(self.feature_names) != self.features.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for "
                f"{self.features.shape[1]} columns"
            )
        if not np.isfinite(self.features).all():
            bad = np.argwhere(~np.isfinite(self.features))[0]
            raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if not np.isin(self.labels, (NEGATIVE, POSITIVE)).all():
            raise DataError("labels must be 0 (negative) or 1 (positive)")
        self.features.flags.writeable = False
        self.labels.flags.writeable = False

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[str, int]:
        return {
            "positive": int(np.sum(self.labels == POSITIVE)),
            "negative": int(np.sum(self.labels == NEGATIVE)),
        }

    def subset(self, indices: np.ndarray) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx].copy(), self.labels[idx].copy(), list(self.feature_names))


@dataclass(frozen=True)
class ScalingParams:
    """Per-feature (min, max) pairs for [0, 1] min-max scaling."""

    minima: np.ndarray
    maxima: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "minima", np.asarray(self.minima, dtype=np.float64))
        object.__setattr__(self, "maxima", np.asarray(self.maxima, dtype=np.float64))
        if self.minima.shape != self.maxima.shape or self.minima.ndim != 1:
            raise DataError("scaling minima/maxima must be 1-D and equal length")
        if np.any(self.minima > self.maxima):
            raise DataError("scaling requires min <= max for every feature")

    @property
    def n_features(self) -> int:
        return self.minima.shape[0]


def parse_csv(data: bytes) -> RawTable:
    """Parse comma-delimited UTF-8 text with a header row.

    Raises DataError for non-UTF-8 input, empty input, or a data row whose
    cell count differs from the header (reported by 1-based data row index).
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataError(f"input is not UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError("empty input: no header row") from None
    header = tuple(cell.strip() for cell in header)
    if not any(header):
        raise DataError("empty input: blank header row")
    rows = []
    for i, row in enumerate(reader, start=1):
        if not row:
            continue  # tolerate trailing blank lines
        if len(row) != len(header):
            raise DataError(f"row {i}: expected {len(header)} cells, got {len(row)}")
        rows.append(tuple(cell.strip() for cell in row))
    return RawTable(header=header, rows=tuple(rows))


def remove_constant_columns(
    table: RawTable, label_name: str | None = None
) -> tuple[RawTable, list[str]]:
    """Drop columns whose raw text cells are identical in every data row.

    The label column is kept even if constant (a warning is logged instead).
    Idempotent; preserves column and row order.
    """
    if table.n_rows == 0:
        raise DataError("cannot clean an empty table")
    removed: list[str] = []
    keep: list[int] = []
    for j, name in enumerate(table.header):
        distinct = {row[j] for row in table.rows}
        if len(distinct) >= 2:
            keep.append(j)
        elif name == label_name:
            logger.warning("label column %r is constant; keeping it", name)
            keep.append(j)
        else:
            removed.append(name)
    header = tuple(table.header[j] for j in keep)
    rows = tuple(tuple(row[j] for j in keep) for row in table.rows)
    return RawTable(header=header, rows=rows), removed


def encode(table: RawTable, schema: DatasetSchema) -> Dataset:
    """Map text cells to reals using the schema's declared feature kinds.

    Numeric cells are parsed as floats, binary/categorical levels map to
    their ordinal index, and the label column maps to 1 when the cell equals
    the schema's positive label, else 0.
    """
    if schema.label_name not in table.header:
        raise DataError(f"label column {schema.label_name!r} not present in table")
    feature_cols = [name for name in table.header if name != schema.label_name]
    if not feature_cols:
        raise DataError("no predictor columns left after cleaning")
    for name in feature_cols:
        if name not in schema.feature_names:
            raise DataError(f"column {name!r} is not declared in the schema")

    n = table.n_rows
    features = np.empty((n, len(feature_cols)), dtype=np.float64)
    col_index = {name: table.header.index(name) for name in table.header}
    for out_j, name in enumerate(feature_cols):
        spec = schema.feature(name)
        j = col_index[name]
        if spec.kind == "numeric":
            for i, row in enumerate(table.rows):
                try:
                    features[i, out_j] = float(row[j])
                except ValueError:
                    raise DataError(
                        f"row {i + 1}, column {name!r}: cannot parse {row[j]!r} as a number"
                    ) from None
        else:
            mapping = {level: float(k) for k, level in enumerate(spec.levels)}
            for i, row in enumerate(table.rows):
                try:
                    features[i, out_j] = mapping[row[j]]
                except KeyError:
                    raise DataError(
                        f"row {i + 1}, column {name!r}: unknown level {row[j]!r} "
                        f"(declared: {list(spec.levels)})"
                    ) from None

    label_j = col_index[schema.label_name]
    labels = np.fromiter(
        (POSITIVE if row[label_j] == schema.positive_label else NEGATIVE for row in table.rows),
        dtype=np.int8,
        count=n,
    )
    return Dataset(features=features, labels=labels, feature_names=feature_cols)


def fit_scaler(ds: Dataset) -> ScalingParams:
    if ds.n_samples == 0:
        raise DataError("cannot fit a scaler on an empty dataset")
    return ScalingParams(minima=ds.features.min(axis=0), maxima=ds.features.max(axis=0))


def apply_scaler(ds: Dataset, params: ScalingParams) -> Dataset:
    """Map each feature x to (x - min) / (max - min); constant features to 0."""
    if params.n_features != ds.n_features:
        raise DataError(
            f"scaler has {params.n_features} features, dataset has {ds.n_features}"
        )
    span = params.maxima - params.minima
    safe_span = np.where(span == 0.0, 1.0, span)
    scaled = (ds.features - params.minima) / safe_span
    scaled[:, span == 0.0] = 0.0
    return Dataset(features=scaled, labels=ds.labels.copy(), feature_names=list(ds.feature_names))


def invert_scaler(ds: Dataset, params: ScalingParams) -> Dataset:
    """Undo apply_scaler: y -> y * (max - min) + min."""
    if params.n_features != ds.n_features:
        raise DataError(
            f"scaler has {params.n_features} features, dataset has {ds.n_features}"
        )
    restored = ds.features * (params.maxima - params.minima) + params.minima
    return Dataset(features=restored, labels=ds.labels.copy(), feature_names=list(ds.feature_names))


def to_columnar(ds: Dataset, provenance: np.ndarray | None = None) -> str:
    """Serialize to the columnar text format: header row, then one CSV row per
    sample with repr-precision floats, the label as positive/negative, and an
    optional provenance tag column."""
    header = list(ds.feature_names) + ["label"]
    if provenance is not None:
        if len(provenance) != ds.n_samples:
            raise DataError("provenance length does not match sample count")
        header.append("provenance")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for i in range(ds.n_samples):
        row = [repr(float(v)) for v in ds.features[i]]
        row.append(LABEL_TEXT[int(ds.labels[i])])
        if provenance is not None:
            row.append(str(provenance[i]))
        writer.writerow(row)
    return out.getvalue()


def from_columnar(text: str) -> tuple[Dataset, np.ndarray | None]:
    """Parse the columnar format back into a Dataset (+ provenance if present).

    repr-precision floats make this a bit-exact round trip of to_columnar.
    """
    table = parse_csv(text.encode("utf-8"))
    if "label" not in table.header:
        raise DataError("columnar dataset is missing the 'label' column")
    has_prov = table.header[-1] == "provenance"
    names = [c for c in table.header if c not in ("label", "provenance")]
    label_j = table.header.index("label")
    n = table.n_rows
    cols = [table.header.index(name) for name in names]
    features = np.empty((n, len(names)), dtype=np.float64)
    labels = np.empty(n, dtype=np.int8)
    text_to_label = {v: k for k, v in LABEL_TEXT.items()}
    for i, row in enumerate(table.rows):
        for j, src in enumerate(cols):
            features[i, j] = float(row[src])
        try:
            labels[i] = text_to_label[row[label_j]]
        except KeyError:
            raise DataError(f"row {i + 1}: unknown label {row[label_j]!r}") from None
    provenance = None
    if has_prov:
        provenance = np.array([row[-1] for row in table.rows])
    return Dataset(features=features, labels=labels, feature_names=names), provenance


def feature_summary(ds: Dataset) -> list[dict[str, float | int | str]]:
    """Plain per-feature summary table (min/max/mean/std/distinct count)."""
    rows = []
    for j, name in enumerate(ds.feature_names):
        col = ds.features[:, j]
        rows.append(
            {
                "feature": name,
                "min": float(col.min()),
                "max": float(col.max()),
                "mean": float(col.mean()),
                "std": float(col.std()),
                "distinct": int(np.unique(col).size),
            }
        )
    return rows
