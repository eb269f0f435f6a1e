"""Dataset schema declarations.

A schema is supplied as an explicit text file rather than inferred from the
CSV, so that unexpected values fail loudly instead of silently changing the
encoding. Format, one declaration per line::

    label = Cath
    positive = Cad
    feature = Age | numeric
    feature = Sex | binary | Fmale, Male
    feature = VHD | categorical | N, mild, Moderate, Severe

``binary`` features list exactly two levels (mapped to 0 and 1); categorical
levels map to their ordinal index in declared order. Lines starting with
``#`` and blank lines are ignored. Feature names may not contain ``|``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import DataError

KINDS = ("numeric", "binary", "categorical")


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # numeric | binary | categorical
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"feature {self.name!r}: unknown kind {self.kind!r}")
        if self.kind == "numeric" and self.levels:
            raise DataError(f"feature {self.name!r}: numeric features take no levels")
        if self.kind == "binary" and len(self.levels) != 2:
            raise DataError(f"feature {self.name!r}: binary features need exactly 2 levels")
        if self.kind == "categorical" and len(self.levels) < 2:
            raise DataError(f"feature {self.name!r}: categorical features need >= 2 levels")
        if len(set(self.levels)) != len(self.levels):
            raise DataError(f"feature {self.name!r}: duplicate levels")


@dataclass(frozen=True)
class DatasetSchema:
    feature_specs: tuple[FeatureSpec, ...]
    label_name: str
    positive_label: str

    def __post_init__(self):
        names = [f.name for f in self.feature_specs]
        if any(not n for n in names):
            raise DataError("empty feature name in schema")
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate feature names in schema: {dupes}")
        if not self.label_name:
            raise DataError("schema declares no label column")
        if self.label_name in names:
            raise DataError(f"label {self.label_name!r} collides with a feature name")

    def feature(self, name: str) -> FeatureSpec:
        for spec in self.feature_specs:
            if spec.name == name:
                return spec
        raise KeyError(name)

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.feature_specs]


def parse_schema(text: str) -> DatasetSchema:
    """Parse the schema declaration format described in the module docstring."""
    label = None
    positive = None
    specs: list[FeatureSpec] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DataError(f"schema line {lineno}: expected 'key = value', got {line!r}")
        key = key.strip()
        value = value.strip()
        if key == "label":
            label = value
        elif key == "positive":
            positive = value
        elif key == "feature":
            parts = [p.strip() for p in value.split("|")]
            if len(parts) not in (2, 3):
                raise DataError(
                    f"schema line {lineno}: expected 'name | kind [| levels]', got {value!r}"
                )
            name, kind = parts[0], parts[1]
            levels = ()
            if len(parts) == 3:
                levels = tuple(lv.strip() for lv in parts[2].split(","))
            specs.append(FeatureSpec(name=name, kind=kind, levels=levels))
        else:
            raise DataError(f"schema line {lineno}: unknown key {key!r}")
    if label is None or positive is None:
        raise DataError("schema must declare both 'label' and 'positive'")
    return DatasetSchema(feature_specs=tuple(specs), label_name=label, positive_label=positive)


def load_schema(path: str | Path) -> DatasetSchema:
    return parse_schema(Path(path).read_text(encoding="utf-8"))
