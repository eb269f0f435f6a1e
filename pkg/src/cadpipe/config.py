"""Pipeline configuration: a flat sectioned key-value file (INI syntax).

Every section has defaults reproducing the reference configuration, so a
minimal file only needs::

    [paths]
    raw_csv = data/table.csv
    out_dir = out

Empty values mean "use the derived default" (for example, per-stage seeds
default to the run seed). The packaged schema for the 59-column angiography
table is used when no schema path is given.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .classifiers import CnnConfig, LogRegConfig, MlpConfig
from .errors import ConfigError
from .resample import SmoteConfig
from .trees import ForestConfig, TreeConfig

PAPER_FAITHFUL = "paper_faithful"
LEAKAGE_SAFE = "leakage_safe"
MODES = (PAPER_FAITHFUL, LEAKAGE_SAFE)

DEFAULT_MODELS = ("cnn", "tree", "forest", "logreg", "mlp")


def default_schema_path() -> Path:
    return Path(resources.files("cadpipe") / "schemas" / "zas_extension.schema")


@dataclass
class AutoencoderSection:
    hidden_dim: int = 32
    epochs: int = 200
    batch_size: int = 32
    lr: float = 0.001
    target_total: int | None = None
    seed: int = 0


@dataclass
class CvSection:
    k: int = 10
    stratify: bool = True
    models: tuple[str, ...] = DEFAULT_MODELS


@dataclass
class PipelineConfig:
    raw_csv: Path
    out_dir: Path
    schema_path: Path
    seed: int = 7
    leakage_mode: str = PAPER_FAITHFUL
    smote: SmoteConfig = field(default_factory=SmoteConfig)
    autoencoder: AutoencoderSection = field(default_factory=AutoencoderSection)
    cnn: CnnConfig = field(default_factory=CnnConfig)
    tree: TreeConfig = field(default_factory=TreeConfig)
    forest: ForestConfig = field(default_factory=ForestConfig)
    logreg: LogRegConfig = field(default_factory=LogRegConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    cv: CvSection = field(default_factory=CvSection)

    def model_configs(self) -> dict:
        return {
            "cnn": self.cnn,
            "tree": self.tree,
            "forest": self.forest,
            "logreg": self.logreg,
            "mlp": self.mlp,
        }

    def snapshot(self) -> dict:
        """Fully resolved values, for the run manifest."""
        return {
            "paths": {
                "raw_csv": str(self.raw_csv),
                "out_dir": str(self.out_dir),
                "schema": str(self.schema_path),
            },
            "run": {"seed": self.seed, "leakage_mode": self.leakage_mode},
            "smote": vars(self.smote) | {},
            "autoencoder": vars(self.autoencoder) | {},
            "cnn": {
                "conv_filters": list(self.cnn.conv_filters),
                "kernel": self.cnn.kernel,
                "stride": self.cnn.stride,
                "conv_l2": self.cnn.conv_l2,
                "dense_units": list(self.cnn.dense_units),
                "dense_l2": self.cnn.dense_l2,
                "dropout": self.cnn.dropout,
                "lr": self.cnn.lr,
                "epochs": self.cnn.epochs,
                "batch_size": self.cnn.batch_size,
            },
            "tree": vars(self.tree) | {},
            "forest": vars(self.forest) | {},
            "logreg": vars(self.logreg) | {},
            "mlp": vars(self.mlp) | {"hidden": list(self.mlp.hidden)},
            "cv": {"k": self.cv.k, "stratify": self.cv.stratify, "models": list(self.cv.models)},
        }


class _Section:
    """Typed accessors over one config section with empty-means-default."""

    def __init__(self, parser: configparser.ConfigParser, name: str):
        self.name = name
        self.raw = dict(parser[name]) if parser.has_section(name) else {}

    def _get(self, key: str):
        value = self.raw.pop(key, None)
        if value is None or value.strip() == "":
            return None
        return value.strip()

    def text(self, key: str, default: str | None) -> str | None:
        value = self._get(key)
        return default if value is None else value

    def integer(self, key: str, default: int | None) -> int | None:
        value = self._get(key)
        if value is None:
            return default
        try:
            return int(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: expected an integer, got {value!r}") from None

    def real(self, key: str, default: float) -> float:
        value = self._get(key)
        if value is None:
            return default
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"[{self.name}] {key}: expected a number, got {value!r}") from None

    def flag(self, key: str, default: bool) -> bool:
        value = self._get(key)
        if value is None:
            return default
        lowered = value.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"[{self.name}] {key}: expected a boolean, got {value!r}")

    def int_tuple(self, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        value = self._get(key)
        if value is None:
            return default
        try:
            return tuple(int(part.strip()) for part in value.split(",") if part.strip())
        except ValueError:
            raise ConfigError(
                f"[{self.name}] {key}: expected comma-separated integers, got {value!r}"
            ) from None

    def reject_unknown(self) -> None:
        if self.raw:
            raise ConfigError(f"[{self.name}] unknown keys: {sorted(self.raw)}")


def load_config(path: str | Path, seed_override: int | None = None,
                mode_override: str | None = None) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None

    known = {"paths", "run", "smote", "autoencoder", "cnn", "tree", "forest",
             "logreg", "mlp", "cv"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    paths = _Section(parser, "paths")
    raw_csv = paths.text("raw_csv", None)
    out_dir = paths.text("out_dir", None)
    if raw_csv is None or out_dir is None:
        raise ConfigError("[paths] must set raw_csv and out_dir")
    schema_text = paths.text("schema", None)
    schema_path = Path(schema_text) if schema_text else default_schema_path()
    paths.reject_unknown()

    run = _Section(parser, "run")
    seed = run.integer("seed", 7)
    mode = run.text("leakage_mode", PAPER_FAITHFUL)
    run.reject_unknown()
    if seed_override is not None:
        seed = seed_override
    if mode_override is not None:
        mode = mode_override
    mode = mode.replace("-", "_")
    if mode not in MODES:
        raise ConfigError(f"leakage_mode must be one of {MODES}, got {mode!r}")
    if seed < 0:
        raise ConfigError("seed must be non-negative")

    smote_sec = _Section(parser, "smote")
    smote = SmoteConfig(
        m_neighbors=smote_sec.integer("m_neighbors", 5),
        k_neighbors=smote_sec.integer("k_neighbors", 5),
        variant=smote_sec.text("variant", "borderline1"),
        target=smote_sec.text("target", "equalize"),
        seed=smote_sec.integer("seed", seed),
    )
    smote_sec.reject_unknown()

    ae_sec = _Section(parser, "autoencoder")
    autoencoder = AutoencoderSection(
        hidden_dim=ae_sec.integer("hidden_dim", 32),
        epochs=ae_sec.integer("epochs", 200),
        batch_size=ae_sec.integer("batch_size", 32),
        lr=ae_sec.real("lr", 0.001),
        target_total=ae_sec.integer("target_total", None),
        seed=ae_sec.integer("seed", seed),
    )
    ae_sec.reject_unknown()

    cnn_sec = _Section(parser, "cnn")
    cnn = CnnConfig(
        conv_filters=cnn_sec.int_tuple("conv_filters", (256, 256, 256, 256)),
        kernel=cnn_sec.integer("kernel", 3),
        stride=cnn_sec.integer("stride", 1),
        conv_l2=cnn_sec.real("conv_l2", 0.2),
        dense_units=cnn_sec.int_tuple("dense_units", (256, 128, 64, 32, 2)),
        dense_l2=cnn_sec.real("dense_l2", 0.0),
        dropout=cnn_sec.real("dropout", 0.5),
        lr=cnn_sec.real("lr", 0.001),
        epochs=cnn_sec.integer("epochs", 100),
        batch_size=cnn_sec.integer("batch_size", 256),
    )
    cnn_sec.reject_unknown()

    tree_sec = _Section(parser, "tree")
    tree = TreeConfig(
        max_depth=tree_sec.integer("max_depth", 12),
        min_samples_split=tree_sec.integer("min_samples_split", 2),
    )
    tree_sec.reject_unknown()

    forest_sec = _Section(parser, "forest")
    forest = ForestConfig(
        n_trees=forest_sec.integer("n_trees", 100),
        feature_subsample=forest_sec.integer("feature_subsample", None),
        bootstrap=forest_sec.flag("bootstrap", True),
        max_depth=forest_sec.integer("max_depth", None),
        min_samples_split=forest_sec.integer("min_samples_split", 2),
    )
    forest_sec.reject_unknown()

    logreg_sec = _Section(parser, "logreg")
    logreg = LogRegConfig(
        lr=logreg_sec.real("lr", 0.1),
        epochs=logreg_sec.integer("epochs", 500),
        l2=logreg_sec.real("l2", 1e-4),
    )
    logreg_sec.reject_unknown()

    mlp_sec = _Section(parser, "mlp")
    mlp = MlpConfig(
        hidden=mlp_sec.int_tuple("hidden", (8,)),
        lr=mlp_sec.real("lr", 0.001),
        epochs=mlp_sec.integer("epochs", 100),
        batch_size=mlp_sec.integer("batch_size", 32),
    )
    mlp_sec.reject_unknown()

    cv_sec = _Section(parser, "cv")
    models_text = cv_sec.text("models", ", ".join(DEFAULT_MODELS))
    models = tuple(m.strip() for m in models_text.split(",") if m.strip())
    bad = [m for m in models if m not in DEFAULT_MODELS]
    if bad:
        raise ConfigError(f"[cv] unknown models: {bad}")
    cv = CvSection(
        k=cv_sec.integer("k", 10),
        stratify=cv_sec.flag("stratify", True),
        models=models,
    )
    cv_sec.reject_unknown()
    if cv.k < 2:
        raise ConfigError("[cv] k must be >= 2")

    return PipelineConfig(
        raw_csv=Path(raw_csv),
        out_dir=Path(out_dir),
        schema_path=schema_path,
        seed=seed,
        leakage_mode=mode,
        smote=smote,
        autoencoder=autoencoder,
        cnn=cnn,
        tree=tree,
        forest=forest,
        logreg=logreg,
        mlp=mlp,
        cv=cv,
    )
