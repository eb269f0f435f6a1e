import numpy as np
import pytest

from cadpipe.dataset import (
    Dataset,
    apply_scaler,
    encode,
    feature_summary,
    fit_scaler,
    from_columnar,
    invert_scaler,
    parse_csv,
    remove_constant_columns,
    to_columnar,
)
from cadpipe.errors import DataError
from cadpipe.schema import DatasetSchema, FeatureSpec, parse_schema


def make_schema(*specs, label="y", positive="yes"):
    return DatasetSchema(feature_specs=tuple(specs), label_name=label, positive_label=positive)


class TestParseCsv:
    def test_wellformed(self):
        table = parse_csv(b"a,b,y\n1,2,yes\n3,4,no\n")
        assert table.header == ("a", "b", "y")
        assert table.n_rows == 2
        assert table.rows[0] == ("1", "2", "yes")

    def test_ragged_row_message(self):
        with pytest.raises(DataError, match=r"row 1: expected 3 cells, got 2"):
            parse_csv(b"a,b,y\n1,2\n")

    def test_empty_input(self):
        with pytest.raises(DataError, match="empty input"):
            parse_csv(b"")

    def test_replica_has_source_counts(self, raw_table):
        assert raw_table.n_rows == 303
        assert len(raw_table.header) == 59

    def test_row_order_preserved(self):
        table = parse_csv(b"a\n3\n1\n2\n")
        assert [r[0] for r in table.rows] == ["3", "1", "2"]


class TestRemoveConstantColumns:
    def test_replica_drops_exactly_exertional_cp(self, raw_table, schema):
        cleaned, removed = remove_constant_columns(raw_table, schema.label_name)
        assert removed == ["Exertional CP"]
        assert len(cleaned.header) == 58  # 57 predictors + label

    def test_no_constant_columns_is_noop(self):
        table = parse_csv(b"a,b\n1,2\n2,1\n")
        cleaned, removed = remove_constant_columns(table)
        assert removed == []
        assert cleaned == table

    def test_hand_built_constant(self):
        table = parse_csv(b"a,b,c\n1,2,5\n3,4,5\n")
        cleaned, removed = remove_constant_columns(table)
        assert removed == ["c"]
        assert cleaned.header == ("a", "b")

    def test_idempotent(self, raw_table, schema):
        once, _ = remove_constant_columns(raw_table, schema.label_name)
        twice, removed = remove_constant_columns(once, schema.label_name)
        assert removed == []
        assert twice == once

    def test_constant_label_kept_with_warning(self, caplog):
        table = parse_csv(b"a,y\n1,yes\n2,yes\n")
        with caplog.at_level("WARNING"):
            cleaned, removed = remove_constant_columns(table, "y")
        assert removed == []
        assert "y" in cleaned.header
        assert any("constant" in rec.message for rec in caplog.records)

    def test_empty_table_rejected(self):
        table = parse_csv(b"a,b\n1,2\n")
        empty = type(table)(header=table.header, rows=())
        with pytest.raises(DataError):
            remove_constant_columns(empty)


class TestEncode:
    def test_binary_mapping(self):
        schema = make_schema(FeatureSpec("flag", "binary", ("N", "Y")))
        ds = encode(parse_csv(b"flag,y\nY,yes\nN,no\n"), schema)
        assert ds.features[:, 0].tolist() == [1.0, 0.0]

    def test_categorical_ordinal_index(self):
        schema = make_schema(FeatureSpec("VHD", "categorical", ("N", "mild", "Moderate", "Severe")))
        ds = encode(parse_csv(b"VHD,y\nModerate,yes\n"), schema)
        assert ds.features[0, 0] == 2.0

    def test_label_mapping(self):
        schema = make_schema(FeatureSpec("a", "numeric"), label="Cath", positive="Cad")
        ds = encode(parse_csv(b"a,Cath\n1,Cad\n2,Normal\n"), schema)
        assert ds.labels.tolist() == [1, 0]

    def test_unparseable_numeric_names_row_and_column(self):
        schema = make_schema(FeatureSpec("a", "numeric"))
        with pytest.raises(DataError, match=r"row 2, column 'a'"):
            encode(parse_csv(b"a,y\n1,yes\n oops,no\n"), schema)

    def test_unknown_level_names_value(self):
        schema = make_schema(FeatureSpec("flag", "binary", ("N", "Y")))
        with pytest.raises(DataError, match="'maybe'"):
            encode(parse_csv(b"flag,y\nmaybe,yes\n"), schema)

    def test_undeclared_column_rejected(self):
        schema = make_schema(FeatureSpec("a", "numeric"))
        with pytest.raises(DataError, match="'b'"):
            encode(parse_csv(b"a,b,y\n1,2,yes\n"), schema)

    def test_replica_shape_and_counts(self, encoded_dataset):
        assert encoded_dataset.features.shape == (303, 57)
        assert encoded_dataset.class_counts() == {"positive": 216, "negative": 87}


class TestScaler:
    def test_hand_arithmetic(self):
        ds = Dataset(np.array([[2.0], [4.0], [6.0]]), np.array([1, 0, 1]), ["x"])
        scaled = apply_scaler(ds, fit_scaler(ds))
        assert scaled.features[:, 0].tolist() == [0.0, 0.5, 1.0]

    def test_constant_feature_maps_to_zero(self):
        ds = Dataset(np.array([[3.0], [3.0]]), np.array([1, 0]), ["x"])
        scaled = apply_scaler(ds, fit_scaler(ds))
        assert scaled.features[:, 0].tolist() == [0.0, 0.0]

    def test_round_trip(self, encoded_dataset):
        params = fit_scaler(encoded_dataset)
        restored = invert_scaler(apply_scaler(encoded_dataset, params), params)
        assert np.allclose(restored.features, encoded_dataset.features, atol=1e-12)

    def test_fitted_data_lands_in_unit_interval(self, scaled_dataset):
        assert scaled_dataset.features.min() >= 0.0
        assert scaled_dataset.features.max() <= 1.0

    def test_length_mismatch_rejected(self):
        ds = Dataset(np.array([[1.0, 2.0]]), np.array([1]), ["a", "b"])
        short = Dataset(np.array([[1.0]]), np.array([1]), ["a"])
        with pytest.raises(DataError):
            apply_scaler(ds, fit_scaler(short))


class TestDatasetInvariants:
    def test_non_finite_rejected(self):
        with pytest.raises(DataError, match="non-finite"):
            Dataset(np.array([[np.nan]]), np.array([1]), ["a"])

    def test_label_length_checked(self):
        with pytest.raises(DataError):
            Dataset(np.ones((2, 1)), np.array([1]), ["a"])

    def test_rows_never_reordered_by_scaling(self, encoded_dataset):
        scaled = apply_scaler(encoded_dataset, fit_scaler(encoded_dataset))
        assert np.array_equal(scaled.labels, encoded_dataset.labels)

    def test_features_are_read_only(self, scaled_dataset):
        with pytest.raises(ValueError):
            scaled_dataset.features[0, 0] = 99.0


class TestColumnarFormat:
    def test_round_trip_bit_exact(self, scaled_dataset):
        text = to_columnar(scaled_dataset)
        back, provenance = from_columnar(text)
        assert provenance is None
        assert np.array_equal(back.features, scaled_dataset.features)
        assert np.array_equal(back.labels, scaled_dataset.labels)
        assert back.feature_names == scaled_dataset.feature_names

    def test_provenance_column(self):
        ds = Dataset(np.array([[0.5], [0.25]]), np.array([1, 0]), ["x"])
        text = to_columnar(ds, np.array(["original", "reconstruction"], dtype=object))
        back, provenance = from_columnar(text)
        assert list(provenance) == ["original", "reconstruction"]
        assert np.array_equal(back.features, ds.features)


def test_feature_summary_shape(encoded_dataset):
    rows = feature_summary(encoded_dataset)
    assert len(rows) == 57
    age = next(r for r in rows if r["feature"] == "Age")
    assert age["min"] <= age["mean"] <= age["max"]
    assert age["distinct"] >= 2


def test_schema_validation_errors():
    with pytest.raises(DataError, match="duplicate"):
        parse_schema("label = y\npositive = p\nfeature = a | numeric\nfeature = a | numeric\n")
    with pytest.raises(DataError, match="collides"):
        parse_schema("label = a\npositive = p\nfeature = a | numeric\n")
    with pytest.raises(DataError, match="exactly 2"):
        parse_schema("label = y\npositive = p\nfeature = a | binary | x\n")
