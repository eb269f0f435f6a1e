import numpy as np
import pytest

from cadpipe.autoencoder import (
    AugmentedDataset,
    AutoencoderSpec,
    augment,
    reconstruct,
    train_autoencoder,
)
from cadpipe.dataset import PROV_RECONSTRUCTION, PROV_SMOTE, Dataset
from cadpipe.errors import DataError
from cadpipe.resample import SmoteConfig, borderline_smote
from cadpipe.rng import Prng


@pytest.fixture(scope="module")
def balanced(scaled_dataset):
    return borderline_smote(scaled_dataset, SmoteConfig(seed=11))


@pytest.fixture(scope="module")
def trained(balanced):
    spec = AutoencoderSpec(input_dim=57, seed=5)
    return train_autoencoder(balanced, spec)


def toy_dataset(n=48, d=6, seed=3, identical=False):
    rng = Prng(seed)
    if identical:
        # moderate values: reachable by the output bias within default training
        features = np.tile(0.35 + 0.3 * rng.uniform(size=(1, d)), (n, 1))
    else:
        features = rng.uniform(size=(n, d))
    labels = np.array([i % 2 for i in range(n)], dtype=np.int8)
    return Dataset(features, labels, [f"f{j}" for j in range(d)])


class TestTrainAutoencoder:
    def test_reference_shapes(self, trained):
        net, _ = trained
        shapes = [arr.shape for arr in net.parameters()]
        assert shapes == [(57, 32), (32,), (32, 57), (57,)]

    def test_unscaled_input_rejected(self):
        ds = toy_dataset()
        shifted = Dataset(ds.features * 10.0, ds.labels, ds.feature_names)
        with pytest.raises(DataError, match="scaled"):
            train_autoencoder(shifted, AutoencoderSpec(input_dim=6, hidden_dim=3))

    def test_identical_rows_reach_tiny_mse(self):
        ds = toy_dataset(identical=True)
        _, mse = train_autoencoder(ds, AutoencoderSpec(input_dim=6, hidden_dim=3, seed=1))
        assert mse < 1e-3

    def test_capacity_monotonicity_on_fixed_seed_pair(self):
        ds = toy_dataset(n=32, d=8, seed=9)
        _, wide = train_autoencoder(ds, AutoencoderSpec(input_dim=8, hidden_dim=8, seed=2))
        _, narrow = train_autoencoder(ds, AutoencoderSpec(input_dim=8, hidden_dim=1, seed=2))
        assert wide <= narrow

    def test_deterministic(self, balanced):
        spec = AutoencoderSpec(input_dim=57, epochs=10, seed=5)
        _, a = train_autoencoder(balanced, spec)
        _, b = train_autoencoder(balanced, spec)
        assert a == b

    def test_hidden_wider_than_input_rejected(self):
        with pytest.raises(DataError):
            AutoencoderSpec(input_dim=4, hidden_dim=5)


class TestReconstruct:
    def test_shape_preserved(self, trained, balanced):
        net, _ = trained
        out = reconstruct(net, balanced)
        assert out.shape == (balanced.n_samples, 57)

    def test_outputs_in_open_unit_interval(self, trained, balanced):
        net, _ = trained
        out = reconstruct(net, balanced)
        assert out.min() > 0.0
        assert out.max() < 1.0

    def test_dimension_mismatch_rejected(self, trained):
        net, _ = trained
        with pytest.raises(DataError):
            reconstruct(net, toy_dataset(d=6))

    def test_training_data_beats_column_permuted_noise(self, trained, balanced):
        """The autoencoder must reconstruct real rows better than rows whose
        joint structure was destroyed by permuting each column independently."""
        net, _ = trained
        rng = Prng(33)
        shuffled = balanced.features.copy()
        for j in range(shuffled.shape[1]):
            shuffled[:, j] = shuffled[rng.permutation(shuffled.shape[0]), j]
        noise = Dataset(shuffled, balanced.labels.copy(), balanced.feature_names)
        mse_real = float(np.mean((reconstruct(net, balanced) - balanced.features) ** 2))
        mse_noise = float(np.mean((reconstruct(net, noise) - noise.features) ** 2))
        assert mse_real <= mse_noise


class TestAugment:
    def test_keep_all_doubles(self, trained, balanced):
        net, _ = trained
        out = augment(balanced, net)
        assert out.dataset.n_samples == 864
        assert int(np.sum(out.provenance == PROV_RECONSTRUCTION)) == 432
        counts = out.dataset.class_counts()
        assert counts["positive"] == counts["negative"] == 432

    def test_target_total_826(self, trained, balanced):
        net, _ = trained
        out = augment(balanced, net, target_total=826)
        assert out.dataset.n_samples == 826
        assert out.dataset.class_counts() == {"positive": 413, "negative": 413}

    def test_reconstruction_labels_copy_sources(self, trained, balanced):
        net, _ = trained
        out = augment(balanced, net)
        n = balanced.n_samples
        assert np.array_equal(out.dataset.labels[n:], balanced.labels)

    def test_selection_prefers_largest_errors(self, trained, balanced):
        net, _ = trained
        recon = reconstruct(net, balanced)
        errors = np.mean((recon - balanced.features) ** 2, axis=1)
        out = augment(balanced, net, target_total=826)
        kept = out.dataset.features[balanced.n_samples:]
        # per class, the kept reconstruction errors dominate the dropped ones
        for label in (0, 1):
            rows = np.flatnonzero(balanced.labels == label)
            kept_rows = [
                i for i in rows
                if any(np.array_equal(recon[i], krow) for krow in kept)
            ]
            dropped = [i for i in rows if i not in kept_rows]
            assert len(kept_rows) == 197
            assert min(errors[kept_rows]) >= max(errors[i] for i in dropped) - 1e-15

    def test_originals_bit_identical(self, trained, balanced):
        net, _ = trained
        out = augment(balanced, net)
        n = balanced.n_samples
        assert np.array_equal(out.dataset.features[:n], balanced.features)

    def test_growth_equals_reconstruction_count(self, trained, balanced):
        net, _ = trained
        out = augment(balanced, net, target_total=700)
        grown = out.dataset.n_samples - balanced.n_samples
        assert grown == int(np.sum(out.provenance == PROV_RECONSTRUCTION)) == 700 - 432

    def test_target_bounds_enforced(self, trained, balanced):
        net, _ = trained
        with pytest.raises(DataError):
            augment(balanced, net, target_total=431)
        with pytest.raises(DataError):
            augment(balanced, net, target_total=865)

    def test_base_provenance_passthrough(self, trained, balanced, scaled_dataset):
        net, _ = trained
        n_orig = scaled_dataset.n_samples
        base = np.array(
            ["original"] * n_orig + [PROV_SMOTE] * (balanced.n_samples - n_orig),
            dtype=object,
        )
        out = augment(balanced, net, base_provenance=base)
        assert list(out.provenance[:n_orig]) == ["original"] * n_orig
        assert int(np.sum(out.provenance == PROV_SMOTE)) == balanced.n_samples - n_orig

    def test_determinism(self, balanced):
        spec = AutoencoderSpec(input_dim=57, epochs=15, seed=6)
        net1, _ = train_autoencoder(balanced, spec)
        net2, _ = train_autoencoder(balanced, spec)
        a = augment(balanced, net1, target_total=826)
        b = augment(balanced, net2, target_total=826)
        assert np.array_equal(a.dataset.features, b.dataset.features)
        assert list(a.provenance) == list(b.provenance)

    def test_reconstructions_must_trail(self):
        ds = toy_dataset(n=4)
        with pytest.raises(DataError, match="after"):
            AugmentedDataset(
                dataset=ds,
                provenance=np.array(
                    [PROV_RECONSTRUCTION, "original", "original", "original"], dtype=object
                ),
            )
