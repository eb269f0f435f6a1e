"""Stage orchestration: artifacts, run manifest, and both leakage modes.

Stage order in paper_faithful mode is clean/scale -> balance -> augment ->
split -> evaluate, which lets synthetic kin of training rows appear in test
folds; leakage_safe re-runs balancing and augmentation inside each fold on
the training portion only, so test folds contain original rows exclusively.
Both modes emit the same report schema tagged with the mode.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .autoencoder import AutoencoderSpec, augment, train_autoencoder
from .classifiers import PUBLISHED_SVM_ROW, make_classifier
from .config import LEAKAGE_SAFE, PAPER_FAITHFUL, PipelineConfig
from .dataset import (
    PROV_ORIGINAL,
    PROV_SMOTE,
    Dataset,
    apply_scaler,
    encode,
    feature_summary,
    fit_scaler,
    from_columnar,
    parse_csv,
    remove_constant_columns,
    to_columnar,
)
from .errors import ConfigError, DataError, IntegrityError
from .evaluate import (
    MetricsReport,
    evaluate_model,
    format_report_table,
    kfold_split,
    macro_metrics,
    stratified_kfold_split,
)
from .metrics import confusion, metrics_from_confusion, roc_auc
from .resample import borderline_smote
from .schema import load_schema

CLEAN = "dataset.clean.csv"
BALANCED = "dataset.balanced.csv"
AUGMENTED = "dataset.augmented.csv"
METRICS = "metrics.json"
COMPARISON = "comparison.csv"
FOLDS = "folds.csv"
MANIFEST = "manifest.json"
SUMMARY = "feature_summary.csv"
SCALING = "scaling.json"

STAGE_ORDER = ("ingest", "balance", "augment", "evaluate", "report")


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Manifest:
    """manifest.json: config snapshot, per-stage digests, counts, timings.

    Content digests are reproducible for a given config; wall-clock entries
    are informational and excluded from any integrity comparison.
    """

    def __init__(self, cfg: PipelineConfig):
        self.path = cfg.out_dir / MANIFEST
        if self.path.exists():
            self.data = json.loads(self.path.read_text(encoding="utf-8"))
        else:
            self.data = {}
        snapshot = cfg.snapshot()
        if self.data.get("config") != snapshot:
            # config changed: stale stage records no longer apply
            self.data = {"config": snapshot, "stages": {}}
        self.data["tool"] = "cadpipe"
        self.data["version"] = __version__
        self.data["mode"] = cfg.leakage_mode
        self.data["seed"] = cfg.seed
        self.data.setdefault("stages", {})

    def record(self, stage: str, *, inputs: dict[str, str], outputs: dict[str, str],
               rows: int, class_counts: dict[str, int], wall_ms: float,
               extra: dict | None = None) -> None:
        entry = {
            "inputs": inputs,
            "outputs": outputs,
            "rows": rows,
            "class_counts": class_counts,
            "wall_ms": round(wall_ms, 3),
        }
        if extra:
            entry.update(extra)
        self.data["stages"][stage] = entry
        self.write()

    def write(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(
            json.dumps(self.data, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def stage(self, name: str) -> dict | None:
        return self.data["stages"].get(name)


def _load_artifact(cfg: PipelineConfig, manifest: Manifest, filename: str,
                   producer: str) -> tuple[Dataset, np.ndarray | None]:
    path = cfg.out_dir / filename
    if not path.exists():
        raise DataError(f"missing {filename}; run the {producer!r} stage first")
    blob = path.read_bytes()
    recorded = manifest.stage(producer)
    if recorded is not None:
        want = recorded.get("outputs", {}).get(filename)
        if want is not None and want != _digest(blob):
            raise IntegrityError(
                f"{filename} does not match the digest recorded by stage {producer!r}; "
                "re-run that stage"
            )
    ds, provenance = from_columnar(blob.decode("utf-8"))
    if recorded is not None and recorded.get("class_counts") != ds.class_counts():
        raise IntegrityError(
            f"{filename}: class counts {ds.class_counts()} disagree with the manifest"
        )
    return ds, provenance


def _write(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = text.encode("utf-8")
    path.write_bytes(data)
    return _digest(data)


# -- stages -------------------------------------------------------------------


def stage_ingest(cfg: PipelineConfig, manifest: Manifest) -> Dataset:
    t0 = time.perf_counter()
    if not cfg.raw_csv.exists():
        raise DataError(f"raw CSV not found: {cfg.raw_csv}")
    raw = cfg.raw_csv.read_bytes()
    schema = load_schema(cfg.schema_path)
    table = parse_csv(raw)
    cleaned, removed = remove_constant_columns(table, schema.label_name)
    encoded = encode(cleaned, schema)
    counts = encoded.class_counts()
    if counts["positive"] == 0 or counts["negative"] == 0:
        raise DataError("ingest produced a single-class dataset")
    params = fit_scaler(encoded)
    scaled = apply_scaler(encoded, params)

    summary_rows = feature_summary(encoded)
    summary_lines = ["feature,min,max,mean,std,distinct"]
    for row in summary_rows:
        summary_lines.append(
            f"\"{row['feature']}\",{row['min']!r},{row['max']!r},"
            f"{row['mean']!r},{row['std']!r},{row['distinct']}"
        )
    outputs = {
        CLEAN: _write(cfg.out_dir / CLEAN, to_columnar(scaled)),
        SUMMARY: _write(cfg.out_dir / SUMMARY, "\n".join(summary_lines) + "\n"),
        SCALING: _write(
            cfg.out_dir / SCALING,
            json.dumps(
                {
                    "feature_names": scaled.feature_names,
                    "minima": [float(v) for v in params.minima],
                    "maxima": [float(v) for v in params.maxima],
                },
                indent=2,
            )
            + "\n",
        ),
    }
    manifest.record(
        "ingest",
        inputs={str(cfg.raw_csv): _digest(raw)},
        outputs=outputs,
        rows=scaled.n_samples,
        class_counts=counts,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extra={"removed_columns": removed, "n_features": scaled.n_features},
    )
    return scaled


def stage_balance(cfg: PipelineConfig, manifest: Manifest) -> tuple[Dataset, np.ndarray]:
    t0 = time.perf_counter()
    clean, _ = _load_artifact(cfg, manifest, CLEAN, "ingest")
    balanced = borderline_smote(clean, cfg.smote)
    provenance = np.array(
        [PROV_ORIGINAL] * clean.n_samples
        + [PROV_SMOTE] * (balanced.n_samples - clean.n_samples),
        dtype=object,
    )
    text = to_columnar(balanced, provenance)
    outputs = {BALANCED: _write(cfg.out_dir / BALANCED, text)}
    manifest.record(
        "balance",
        inputs={CLEAN: manifest.stage("ingest")["outputs"][CLEAN]
                if manifest.stage("ingest") else _digest((cfg.out_dir / CLEAN).read_bytes())},
        outputs=outputs,
        rows=balanced.n_samples,
        class_counts=balanced.class_counts(),
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extra={"synthetic_rows": int(balanced.n_samples - clean.n_samples)},
    )
    return balanced, provenance


def stage_augment(cfg: PipelineConfig, manifest: Manifest) -> Dataset:
    t0 = time.perf_counter()
    balanced, provenance = _load_artifact(cfg, manifest, BALANCED, "balance")
    if provenance is None:
        provenance = np.full(balanced.n_samples, PROV_ORIGINAL, dtype=object)
    spec = AutoencoderSpec(
        input_dim=balanced.n_features,
        hidden_dim=cfg.autoencoder.hidden_dim,
        epochs=cfg.autoencoder.epochs,
        batch_size=cfg.autoencoder.batch_size,
        lr=cfg.autoencoder.lr,
        seed=cfg.autoencoder.seed,
    )
    net, final_mse = train_autoencoder(balanced, spec)
    augmented = augment(balanced, net, cfg.autoencoder.target_total, provenance)
    text = to_columnar(augmented.dataset, augmented.provenance)
    outputs = {AUGMENTED: _write(cfg.out_dir / AUGMENTED, text)}
    manifest.record(
        "augment",
        inputs={BALANCED: manifest.stage("balance")["outputs"][BALANCED]
                if manifest.stage("balance") else _digest((cfg.out_dir / BALANCED).read_bytes())},
        outputs=outputs,
        rows=augmented.dataset.n_samples,
        class_counts=augmented.dataset.class_counts(),
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extra={
            "reconstruction_mse": final_mse,
            "kept_reconstructions": int(
                np.sum(augmented.provenance == "reconstruction")
            ),
        },
    )
    return augmented.dataset


def _make_plan(cfg: PipelineConfig, labels: np.ndarray):
    if cfg.cv.stratify:
        return stratified_kfold_split(labels, cfg.cv.k, cfg.seed)
    return kfold_split(labels.size, cfg.cv.k, cfg.seed)


def stage_evaluate(cfg: PipelineConfig, manifest: Manifest) -> dict:
    t0 = time.perf_counter()
    if cfg.leakage_mode == PAPER_FAITHFUL:
        data, provenance = _load_artifact(cfg, manifest, AUGMENTED, "augment")
        input_name, producer = AUGMENTED, "augment"
        plan = _make_plan(cfg, data.labels)
        reports = {
            name: evaluate_model(
                lambda name=name: make_classifier(name, cfg.model_configs()), data, plan
            )
            for name in cfg.cv.models
        }
        leakage_note = "synthetic kin of training rows may appear in test folds"
    else:
        data, provenance = _load_artifact(cfg, manifest, CLEAN, "ingest")
        input_name, producer = CLEAN, "ingest"
        plan = _make_plan(cfg, data.labels)
        reports = {
            name: _evaluate_leakage_safe(cfg, data, plan, name) for name in cfg.cv.models
        }
        leakage_note = "balancing and augmentation are fit per fold on training rows only"

    payload = {
        "mode": cfg.leakage_mode,
        "seed": cfg.seed,
        "note": leakage_note,
        "dataset": {
            "rows": data.n_samples,
            "class_counts": data.class_counts(),
            "source": input_name,
        },
        "cv": {"k": cfg.cv.k, "stratify": cfg.cv.stratify},
        "models": {name: report.to_dict() for name, report in reports.items()},
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    outputs = {METRICS: _write(cfg.out_dir / METRICS, text)}
    manifest.record(
        "evaluate",
        inputs={input_name: manifest.stage(producer)["outputs"][input_name]
                if manifest.stage(producer) else _digest((cfg.out_dir / input_name).read_bytes())},
        outputs=outputs,
        rows=data.n_samples,
        class_counts=data.class_counts(),
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extra={
            "models": list(cfg.cv.models),
            "cnn_main_layers": cfg.cnn.main_layer_count if "cnn" in cfg.cv.models else None,
        },
    )
    return payload


def _evaluate_leakage_safe(cfg: PipelineConfig, clean: Dataset, plan, name: str) -> MetricsReport:
    """Per fold: balance + augment the training portion, fit, score the
    held-out original rows. Test folds never contain synthetic rows."""
    fold_metrics = []
    fold_macro = []
    flags: list[str] = []
    for i, test_idx in enumerate(plan.folds):
        test_labels = clean.labels[test_idx]
        if len(np.unique(test_labels)) < 2:
            raise DataError(f"fold {i} contains a single class; stratify the split")
        train = clean.subset(plan.train_indices(i))
        fold_smote = replace(cfg.smote, seed=cfg.smote.seed ^ i)
        balanced = borderline_smote(train, fold_smote)
        spec = AutoencoderSpec(
            input_dim=balanced.n_features,
            hidden_dim=cfg.autoencoder.hidden_dim,
            epochs=cfg.autoencoder.epochs,
            batch_size=cfg.autoencoder.batch_size,
            lr=cfg.autoencoder.lr,
            seed=cfg.autoencoder.seed ^ i,
        )
        net, _ = train_autoencoder(balanced, spec)
        augmented = augment(balanced, net)  # keep-all reconstructions per fold
        model = make_classifier(name, cfg.model_configs())
        model.fit(augmented.dataset, seed=plan.seed ^ i)
        scores = np.asarray(model.predict_scores(clean.features[test_idx]), dtype=np.float64)
        predicted = (scores >= 0.5).astype(np.int8)
        pos_metrics, fold_flags = metrics_from_confusion(confusion(test_labels, predicted))
        pos_metrics["roc_auc"] = roc_auc(scores, test_labels)
        fold_metrics.append(pos_metrics)
        fold_macro.append(macro_metrics(test_labels, predicted))
        flags.extend(f"fold {i}: {flag}" for flag in fold_flags)
    model_name = type(make_classifier(name, cfg.model_configs())).__name__
    return MetricsReport(model=model_name, fold_metrics=fold_metrics,
                         fold_macro=fold_macro, flags=flags)


def stage_report(cfg: PipelineConfig, manifest: Manifest) -> None:
    t0 = time.perf_counter()
    path = cfg.out_dir / METRICS
    if not path.exists():
        raise DataError(f"missing {METRICS}; run the 'evaluate' stage first")
    blob = path.read_bytes()
    recorded = manifest.stage("evaluate")
    if recorded is not None:
        want = recorded.get("outputs", {}).get(METRICS)
        if want is not None and want != _digest(blob):
            raise IntegrityError(f"{METRICS} does not match the manifest; re-run evaluate")
    payload = json.loads(blob.decode("utf-8"))

    table_rows = []
    comparison = ["model,recall,precision,f1,accuracy,roc_auc,source,mode"]
    for name, report in payload["models"].items():
        agg = report["aggregate"]
        row = {key: agg[key] * 100.0 for key in
               ("recall", "precision", "f1", "accuracy", "roc_auc")}
        row.update(model=name, source="evaluated")
        table_rows.append(row)
        comparison.append(
            f"{name},{agg['recall'] * 100:.2f},{agg['precision'] * 100:.2f},"
            f"{agg['f1'] * 100:.2f},{agg['accuracy'] * 100:.2f},"
            f"{agg['roc_auc'] * 100:.2f},evaluated,{payload['mode']}"
        )
    svm = PUBLISHED_SVM_ROW
    table_rows.append(dict(svm))
    comparison.append(
        f"{svm['model']},{svm['recall']:.2f},{svm['precision']:.2f},{svm['f1']:.2f},"
        f"{svm['accuracy']:.2f},{svm['roc_auc']:.2f},{svm['source']},"
    )
    print(f"[{payload['mode']}]")
    print(format_report_table(table_rows), end="")

    folds = ["model,fold,accuracy"]
    for name, report in payload["models"].items():
        for fold in report["folds"]:
            folds.append(f"{name},{fold['fold']},{fold['accuracy'] * 100:.2f}")

    outputs = {
        COMPARISON: _write(cfg.out_dir / COMPARISON, "\n".join(comparison) + "\n"),
        FOLDS: _write(cfg.out_dir / FOLDS, "\n".join(folds) + "\n"),
    }
    manifest.record(
        "report",
        inputs={METRICS: _digest(blob)},
        outputs=outputs,
        rows=payload["dataset"]["rows"],
        class_counts=payload["dataset"]["class_counts"],
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


def run_stage(stage: str, cfg: PipelineConfig) -> Manifest:
    if stage not in STAGE_ORDER:
        raise ConfigError(f"unknown stage {stage!r}; expected one of {STAGE_ORDER}")
    if cfg.leakage_mode == LEAKAGE_SAFE and stage in ("balance", "augment"):
        raise ConfigError(
            f"stage {stage!r} does not apply in leakage_safe mode; balancing and "
            "augmentation run inside each evaluation fold"
        )
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(cfg)
    if stage == "ingest":
        stage_ingest(cfg, manifest)
    elif stage == "balance":
        stage_balance(cfg, manifest)
    elif stage == "augment":
        stage_augment(cfg, manifest)
    elif stage == "evaluate":
        stage_evaluate(cfg, manifest)
    else:
        stage_report(cfg, manifest)
    return manifest


def run_all(cfg: PipelineConfig) -> Manifest:
    """The full pipeline in the configured leakage mode."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(cfg)
    stage_ingest(cfg, manifest)
    if cfg.leakage_mode == PAPER_FAITHFUL:
        stage_balance(cfg, manifest)
        stage_augment(cfg, manifest)
    stage_evaluate(cfg, manifest)
    stage_report(cfg, manifest)
    return manifest
