"""Classifier contract, the 1D-CNN, and the classical baselines.

Every model exposes fit(dataset, seed), predict_scores(features) -> [0, 1]
positive-class scores, and predict_labels(features, threshold). The CNN and
MLP ride on the network engine; tree and forest wrap the CART module;
logistic regression is full-batch gradient descent on BCE + L2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .dataset import Dataset
from .engine import (
    ConvSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    Network,
    NetworkSpec,
)
from .engine.layers import sigmoid
from .engine.optim import AdamParams
from .errors import DataError
from .trees import DecisionTree, ForestConfig, RandomForest, TreeConfig


class Classifier(Protocol):
    def fit(self, train: Dataset, seed: int) -> "Classifier": ...

    def predict_scores(self, features: np.ndarray) -> np.ndarray: ...

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray: ...


def _labels_from_scores(scores: np.ndarray, threshold: float) -> np.ndarray:
    return (scores >= threshold).astype(np.int8)


def _require_both_classes(train: Dataset) -> None:
    counts = train.class_counts()
    if counts["positive"] == 0 or counts["negative"] == 0:
        raise DataError("training set must contain both classes")


# -- CNN ----------------------------------------------------------------------


@dataclass(frozen=True)
class CnnConfig:
    conv_filters: tuple[int, ...] = (256, 256, 256, 256)
    kernel: int = 3
    stride: int = 1
    conv_l2: float = 0.2
    dense_units: tuple[int, ...] = (256, 128, 64, 32, 2)
    dense_l2: float = 0.0
    dropout: float = 0.5
    lr: float = 0.001
    epochs: int = 100
    batch_size: int = 256

    def __post_init__(self):
        if len(self.conv_filters) < 1 or len(self.dense_units) < 2:
            raise DataError("CNN needs conv layers and at least two dense layers")
        if self.dense_units[-1] != 2:
            raise DataError("the CNN output layer has 2 sigmoid units")

    @property
    def main_layer_count(self) -> int:
        """Conventional layer count: convolutional + dense layers only
        (flatten and dropout are not counted as main layers)."""
        return len(self.conv_filters) + len(self.dense_units)


def build_cnn(cfg: CnnConfig, n_features: int, seed: int) -> NetworkSpec:
    """Network spec for the tabular CNN: stacked same-padding convolutions
    over the feature sequence, then a dense funnel with dropout after every
    hidden dense layer, ending in a 2-unit sigmoid output."""
    if n_features < cfg.kernel:
        raise DataError(
            f"feature count {n_features} is smaller than the kernel size {cfg.kernel}"
        )
    layers: list = [
        ConvSpec(filters=f, kernel=cfg.kernel, stride=cfg.stride,
                 activation="relu", l2=cfg.conv_l2)
        for f in cfg.conv_filters
    ]
    layers.append(FlattenSpec())
    for units in cfg.dense_units[:-1]:
        layers.append(DenseSpec(units=units, activation="relu", l2=cfg.dense_l2))
        layers.append(DropoutSpec(p=cfg.dropout))
    layers.append(DenseSpec(units=cfg.dense_units[-1], activation="sigmoid", l2=cfg.dense_l2))
    return NetworkSpec(
        input_shape=(n_features, 1),
        layers=tuple(layers),
        loss="binary_cross_entropy",
        optimizer=AdamParams(lr=cfg.lr),
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        seed=seed,
    )


def cnn_predict_scores(net: Network, features: np.ndarray) -> np.ndarray:
    """Reduce the (negative, positive) sigmoid pair to one positive score:
    o_pos / (o_pos + o_neg), and 0.5 when both units are zero."""
    x = np.asarray(features, dtype=np.float64)
    out = net.predict(x.reshape(x.shape[0], x.shape[1], 1))
    denom = out[:, 0] + out[:, 1]
    scores = np.full(out.shape[0], 0.5)
    nz = denom > 0.0
    scores[nz] = out[nz, 1] / denom[nz]
    return scores


class CnnClassifier:
    def __init__(self, config: CnnConfig | None = None):
        self.config = config or CnnConfig()
        self.net: Network | None = None

    def fit(self, train: Dataset, seed: int) -> "CnnClassifier":
        _require_both_classes(train)
        spec = build_cnn(self.config, train.n_features, seed)
        self.net = Network(spec)
        x = train.features.reshape(train.n_samples, train.n_features, 1)
        targets = np.zeros((train.n_samples, 2))
        targets[np.arange(train.n_samples), train.labels.astype(int)] = 1.0
        self.history = self.net.train(x, targets)
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.net is None:
            raise DataError("classifier is not fitted")
        return cnn_predict_scores(self.net, features)

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return _labels_from_scores(self.predict_scores(features), threshold)


# -- logistic regression -------------------------------------------------------


@dataclass(frozen=True)
class LogRegConfig:
    lr: float = 0.1
    epochs: int = 500
    l2: float = 1e-4


class LogisticRegression:
    """sigmoid(w.x + b) fit by full-batch gradient descent on BCE + L2.

    Weights start at zero, so the fit is deterministic; the seed argument is
    accepted for contract uniformity."""

    def __init__(self, config: LogRegConfig | None = None):
        self.config = config or LogRegConfig()
        self.w: np.ndarray | None = None
        self.b = 0.0

    def fit(self, train: Dataset, seed: int = 0) -> "LogisticRegression":
        _require_both_classes(train)
        X = train.features
        y = train.labels.astype(np.float64)
        n, d = X.shape
        cfg = self.config
        w = np.zeros(d)
        b = 0.0
        for _ in range(cfg.epochs):
            p = sigmoid(X @ w + b)
            err = p - y
            w -= cfg.lr * (X.T @ err / n + 2.0 * cfg.l2 * w)
            b -= cfg.lr * float(err.mean())
        self.w, self.b = w, b
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.w is None:
            raise DataError("classifier is not fitted")
        return sigmoid(np.asarray(features, dtype=np.float64) @ self.w + self.b)

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return _labels_from_scores(self.predict_scores(features), threshold)


# -- MLP -----------------------------------------------------------------------


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (8,)
    lr: float = 0.001
    epochs: int = 100
    batch_size: int = 32


class MlpClassifier:
    """Dense relu stack with a scalar sigmoid output, trained with Adam."""

    def __init__(self, config: MlpConfig | None = None):
        self.config = config or MlpConfig()
        self.net: Network | None = None

    def fit(self, train: Dataset, seed: int) -> "MlpClassifier":
        _require_both_classes(train)
        cfg = self.config
        layers = tuple(DenseSpec(units=h, activation="relu") for h in cfg.hidden) + (
            DenseSpec(units=1, activation="sigmoid"),
        )
        spec = NetworkSpec(
            input_shape=(train.n_features,),
            layers=layers,
            loss="binary_cross_entropy",
            optimizer=AdamParams(lr=cfg.lr),
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            seed=seed,
        )
        self.net = Network(spec)
        self.history = self.net.train(
            train.features, train.labels.astype(np.float64).reshape(-1, 1)
        )
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.net is None:
            raise DataError("classifier is not fitted")
        return self.net.predict(np.asarray(features, dtype=np.float64))[:, 0]

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return _labels_from_scores(self.predict_scores(features), threshold)


# -- tree / forest adapters ------------------------------------------------------


class TreeClassifier:
    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self.tree: DecisionTree | None = None

    def fit(self, train: Dataset, seed: int = 0) -> "TreeClassifier":
        _require_both_classes(train)
        self.tree = DecisionTree(self.config).fit(train.features, train.labels)
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.tree is None:
            raise DataError("classifier is not fitted")
        return self.tree.predict_scores(features)

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return _labels_from_scores(self.predict_scores(features), threshold)


class ForestClassifier:
    def __init__(self, config: ForestConfig | None = None):
        self.config = config or ForestConfig()
        self.forest: RandomForest | None = None

    def fit(self, train: Dataset, seed: int) -> "ForestClassifier":
        _require_both_classes(train)
        self.forest = RandomForest(self.config).fit(train.features, train.labels, seed)
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.forest is None:
            raise DataError("classifier is not fitted")
        return self.forest.predict_scores(features)

    def predict_labels(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        return _labels_from_scores(self.predict_scores(features), threshold)


# -- registry --------------------------------------------------------------------

MODEL_NAMES = ("cnn", "tree", "forest", "logreg", "mlp")

# Reference results for the SVM row of the comparison report: this baseline
# is not re-trained here, the published figures are quoted for context.
PUBLISHED_SVM_ROW = {
    "model": "svm",
    "recall": 92.45,
    "precision": 94.60,
    "f1": 93.40,
    "accuracy": 94.66,
    "roc_auc": 93.51,
    "source": "published",
}


def make_classifier(name: str, configs: dict | None = None) -> Classifier:
    """Fresh unfitted classifier by registry name; configs maps model name
    to its config object."""
    configs = configs or {}
    if name == "cnn":
        return CnnClassifier(configs.get("cnn"))
    if name == "tree":
        return TreeClassifier(configs.get("tree"))
    if name == "forest":
        return ForestClassifier(configs.get("forest"))
    if name == "logreg":
        return LogisticRegression(configs.get("logreg"))
    if name == "mlp":
        return MlpClassifier(configs.get("mlp"))
    raise DataError(f"unknown model {name!r}")
