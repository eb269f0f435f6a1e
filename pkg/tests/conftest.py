import pytest

from cadpipe.config import default_schema_path
from cadpipe.dataset import apply_scaler, encode, fit_scaler, parse_csv, remove_constant_columns
from cadpipe.schema import load_schema
from cadpipe.synthetic import generate


@pytest.fixture(scope="session")
def schema():
    return load_schema(default_schema_path())


@pytest.fixture(scope="session")
def replica_csv_bytes():
    return generate().encode("utf-8")


@pytest.fixture(scope="session")
def raw_table(replica_csv_bytes):
    return parse_csv(replica_csv_bytes)


@pytest.fixture(scope="session")
def encoded_dataset(raw_table, schema):
    cleaned, _ = remove_constant_columns(raw_table, schema.label_name)
    return encode(cleaned, schema)


@pytest.fixture(scope="session")
def scaled_dataset(encoded_dataset):
    return apply_scaler(encoded_dataset, fit_scaler(encoded_dataset))


@pytest.fixture(scope="session")
def replica_csv_path(tmp_path_factory, replica_csv_bytes):
    path = tmp_path_factory.mktemp("data") / "replica.csv"
    path.write_bytes(replica_csv_bytes)
    return path
