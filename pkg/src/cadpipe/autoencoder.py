"""Autoencoder-based data augmentation.

A single-bottleneck autoencoder (input -> hidden relu -> sigmoid output of
input width) is trained to reconstruct the feature matrix; its
reconstructions are appended to the dataset as new samples carrying their
source row's label. Features must already be min-max scaled: the sigmoid
output cannot reach values outside (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import (
    PROV_ORIGINAL,
    PROV_RECONSTRUCTION,
    Dataset,
)
from .engine import DenseSpec, Network, NetworkSpec
from .engine.optim import AdamParams
from .errors import DataError


@dataclass(frozen=True)
class AutoencoderSpec:
    input_dim: int
    hidden_dim: int = 32
    hidden_activation: str = "relu"
    output_activation: str = "sigmoid"
    epochs: int = 200
    batch_size: int = 32
    lr: float = 0.001
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.hidden_dim <= self.input_dim:
            raise DataError(
                f"hidden_dim must be in [1, input_dim]; got {self.hidden_dim} "
                f"for input_dim {self.input_dim}"
            )
        if self.hidden_activation != "relu" or self.output_activation != "sigmoid":
            raise DataError("autoencoder supports relu hidden and sigmoid output only")


@dataclass
class AugmentedDataset:
    """A dataset plus per-row provenance; reconstructions come last."""

    dataset: Dataset
    provenance: np.ndarray  # per-row tag

    def __post_init__(self):
        self.provenance = np.asarray(self.provenance)
        if self.provenance.shape != (self.dataset.n_samples,):
            raise DataError("provenance length must equal the sample count")
        rec = self.provenance == PROV_RECONSTRUCTION
        if rec.any():
            first = int(np.argmax(rec))
            if not rec[first:].all():
                raise DataError("reconstruction rows must come after all other rows")


def _network_spec(spec: AutoencoderSpec) -> NetworkSpec:
    return NetworkSpec(
        input_shape=(spec.input_dim,),
        layers=(
            DenseSpec(units=spec.hidden_dim, activation=spec.hidden_activation),
            DenseSpec(units=spec.input_dim, activation=spec.output_activation),
        ),
        loss="mean_squared_error",
        optimizer=AdamParams(lr=spec.lr),
        epochs=spec.epochs,
        batch_size=spec.batch_size,
        seed=spec.seed,
    )


def train_autoencoder(ds: Dataset, spec: AutoencoderSpec) -> tuple[Network, float]:
    """Train the reconstruction network; returns (net, final-epoch MSE).

    Rejects features outside [-0.01, 1.01], the symptom of unscaled input.
    """
    if ds.n_features != spec.input_dim:
        raise DataError(
            f"dataset has {ds.n_features} features, autoencoder expects {spec.input_dim}"
        )
    if ds.features.min() < -0.01 or ds.features.max() > 1.01:
        raise DataError(
            "autoencoder input must be min-max scaled to [0, 1] "
            f"(observed range [{ds.features.min():.3g}, {ds.features.max():.3g}])"
        )
    net = Network(_network_spec(spec))
    history = net.train(ds.features, ds.features)
    return net, history[-1]


def reconstruct(net: Network, ds: Dataset) -> np.ndarray:
    """Eval-mode reconstruction of every row; entries lie in (0, 1)."""
    if ds.n_features != net.spec.input_shape[0]:
        raise DataError(
            f"dataset has {ds.n_features} features, autoencoder expects "
            f"{net.spec.input_shape[0]}"
        )
    return net.predict(ds.features)


def augment(
    ds: Dataset,
    net: Network,
    target_total: int | None = None,
    base_provenance: np.ndarray | None = None,
) -> AugmentedDataset:
    """Append reconstructions to the dataset, labels copied from source rows.

    With target_total unset every reconstruction is kept (output size 2n).
    With target_total = T, the T - n reconstructions with the largest
    per-row reconstruction error are kept (ties broken by ascending row
    index), under per-class quotas proportional to the source class counts
    (largest-remainder rounding) so class balance is preserved as closely as
    integer arithmetic allows.
    """
    n = ds.n_samples
    if base_provenance is None:
        base_provenance = np.full(n, PROV_ORIGINAL, dtype=object)
    else:
        base_provenance = np.asarray(base_provenance)
        if base_provenance.shape != (n,):
            raise DataError("base_provenance length must equal the sample count")

    recon = reconstruct(net, ds)
    if target_total is None:
        keep = np.arange(n)
    else:
        if not n <= target_total <= 2 * n:
            raise DataError(
                f"target_total must lie in [{n}, {2 * n}], got {target_total}"
            )
        keep = _select_rows(ds, recon, target_total - n)

    features = np.vstack([ds.features, recon[keep]])
    labels = np.concatenate([ds.labels, ds.labels[keep]])
    provenance = np.concatenate(
        [base_provenance, np.full(keep.size, PROV_RECONSTRUCTION, dtype=object)]
    )
    out = Dataset(features=features, labels=labels, feature_names=list(ds.feature_names))
    return AugmentedDataset(dataset=out, provenance=provenance)


def _select_rows(ds: Dataset, recon: np.ndarray, n_keep: int) -> np.ndarray:
    """Indices of the n_keep source rows whose reconstructions to keep."""
    if n_keep == 0:
        return np.arange(0)
    errors = np.mean((recon - ds.features) ** 2, axis=1)
    quotas = _class_quotas(ds.labels, n_keep)
    chosen: list[np.ndarray] = []
    for label, quota in quotas.items():
        rows = np.flatnonzero(ds.labels == label)
        # sort by (-error, index): largest error first, lower index on ties
        order = np.lexsort((rows, -errors[rows]))
        chosen.append(rows[order[:quota]])
    return np.sort(np.concatenate(chosen))


def _class_quotas(labels: np.ndarray, n_keep: int) -> dict[int, int]:
    """Largest-remainder apportionment of n_keep across class counts."""
    classes = [0, 1]
    counts = {c: int(np.sum(labels == c)) for c in classes}
    total = sum(counts.values())
    exact = {c: n_keep * counts[c] / total for c in classes}
    quotas = {c: int(exact[c]) for c in classes}
    leftovers = n_keep - sum(quotas.values())
    by_remainder = sorted(classes, key=lambda c: (-(exact[c] - quotas[c]), c))
    for c in by_remainder[:leftovers]:
        quotas[c] += 1
    for c in classes:
        if quotas[c] > counts[c]:  # cannot keep more reconstructions than rows
            overflow = quotas[c] - counts[c]
            quotas[c] = counts[c]
            other = classes[1 - classes.index(c)]
            quotas[other] += overflow
    return quotas
