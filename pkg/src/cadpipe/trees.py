"""CART decision tree (Gini impurity) and bootstrap-bagged random forest.

Split thresholds are midpoints between consecutive distinct sorted feature
values; the best split maximizes Gini decrease with deterministic
tie-breaking (first feature in candidate order, then smallest threshold).
A node is split whenever it is impure, large enough, within the depth cap
and some valid threshold exists, so a fully grown tree on distinct rows
reproduces its training labels exactly.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .rng import Prng


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = 12
    min_samples_split: int = 2
    criterion: str = "gini"

    def __post_init__(self):
        if self.criterion != "gini":
            raise DataError(f"unsupported split criterion {self.criterion!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise DataError("max_depth must be >= 1 or None")
        if self.min_samples_split < 2:
            raise DataError("min_samples_split must be >= 2")


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    feature_subsample: int | None = None  # None -> ceil(sqrt(n_features))
    bootstrap: bool = True
    max_depth: int | None = None  # forest trees grow fully by default
    min_samples_split: int = 2

    def __post_init__(self):
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")
        if self.feature_subsample is not None and self.feature_subsample < 1:
            raise DataError("feature_subsample must be >= 1 or None")


def _ensure_recursion_room(extra: int) -> None:
    if sys.getrecursionlimit() < extra + 1000:
        sys.setrecursionlimit(extra + 1000)


def gini(pos: float, total: float) -> float:
    """Gini impurity of a binary node: 1 - p^2 - (1-p)^2."""
    if total == 0:
        return 0.0
    p = pos / total
    return 1.0 - p * p - (1.0 - p) * (1.0 - p)


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    score: float = 0.0  # positive-class fraction; valid for leaves

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class DecisionTree:
    """Binary CART classifier scoring by leaf positive-class proportion."""

    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self.root: _Node | None = None
        self.n_features = 0

    def fit(self, features: np.ndarray, labels: np.ndarray,
            feature_rng: Prng | None = None, feature_subsample: int | None = None) -> "DecisionTree":
        """Grow the tree; feature_rng/feature_subsample enable the per-split
        random candidate subsets used by the forest."""
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        if features.shape[0] != labels.shape[0] or features.shape[0] == 0:
            raise DataError("features and labels must be non-empty and row-aligned")
        self.n_features = features.shape[1]
        self._rng = feature_rng
        self._subsample = feature_subsample
        # an uncapped tree can in the worst case nest one level per sample
        _ensure_recursion_room(features.shape[0] + 100)
        self.root = self._grow(features, labels, np.arange(features.shape[0]), depth=0)
        return self

    def _candidate_features(self) -> np.ndarray:
        if self._subsample is None or self._subsample >= self.n_features:
            return np.arange(self.n_features)
        if self._rng is None:
            raise DataError("feature subsampling requires a random stream")
        return self._rng.subset(self.n_features, self._subsample)

    def _grow(self, X: np.ndarray, y: np.ndarray, idx: np.ndarray, depth: int) -> _Node:
        y_node = y[idx]
        n = idx.size
        pos = int(np.sum(y_node == 1))
        score = pos / n
        cfg = self.config
        if (
            pos in (0, n)
            or n < cfg.min_samples_split
            or (cfg.max_depth is not None and depth >= cfg.max_depth)
        ):
            return _Node(score=score)
        split = self._best_split(X, y_node, idx, pos)
        if split is None:
            return _Node(score=score)
        feature, threshold = split
        mask = X[idx, feature] <= threshold
        left = self._grow(X, y, idx[mask], depth + 1)
        right = self._grow(X, y, idx[~mask], depth + 1)
        return _Node(feature=feature, threshold=threshold, left=left, right=right, score=score)

    def _best_split(self, X: np.ndarray, y_node: np.ndarray, idx: np.ndarray,
                    pos: int) -> tuple[int, float] | None:
        n = idx.size
        parent = gini(pos, n)
        best_gain = 0.0
        best: tuple[int, float] | None = None
        for feature in self._candidate_features():
            values = X[idx, feature]
            order = np.argsort(values, kind="stable")
            v_sorted = values[order]
            valid = v_sorted[:-1] < v_sorted[1:]
            if not valid.any():
                continue
            pos_sorted = (y_node[order] == 1).astype(np.float64)
            cum_pos = np.cumsum(pos_sorted)[:-1]
            n_left = np.arange(1, n, dtype=np.float64)
            n_right = n - n_left
            pos_right = pos - cum_pos
            p_l = cum_pos / n_left
            p_r = pos_right / n_right
            gini_l = 1.0 - p_l * p_l - (1.0 - p_l) * (1.0 - p_l)
            gini_r = 1.0 - p_r * p_r - (1.0 - p_r) * (1.0 - p_r)
            gain = parent - (n_left * gini_l + n_right * gini_r) / n
            gain[~valid] = -np.inf
            at = int(np.argmax(gain))  # first maximum = smallest threshold
            if best is None or gain[at] > best_gain:
                best_gain = float(gain[at])
                best = (int(feature), float((v_sorted[at] + v_sorted[at + 1]) / 2.0))
        return best

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if self.root is None:
            raise DataError("tree is not fitted")
        features = np.asarray(features, dtype=np.float64)
        out = np.empty(features.shape[0])
        for i, row in enumerate(features):
            node = self.root
            while not node.is_leaf:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.score
        return out

    # -- text serialization -------------------------------------------------
    # One preorder-numbered node per line:
    #   <id> split <feature> <threshold> <left_id> <right_id>
    #   <id> leaf <score>

    def to_text(self) -> str:
        if self.root is None:
            raise DataError("tree is not fitted")
        _ensure_recursion_room(5000)
        lines = [f"cadpipe-tree 1 {self.n_features}"]
        counter = [0]

        def walk(node: _Node) -> int:
            node_id = counter[0]
            counter[0] += 1
            if node.is_leaf:
                lines.append(f"{node_id} leaf {node.score!r}")
            else:
                placeholder = len(lines)
                lines.append("")
                left_id = walk(node.left)
                right_id = walk(node.right)
                lines[placeholder] = (
                    f"{node_id} split {node.feature} {node.threshold!r} {left_id} {right_id}"
                )
            return node_id

        walk(self.root)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DecisionTree":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].split()
        if len(head) != 3 or head[0] != "cadpipe-tree" or head[1] != "1":
            raise DataError("not a cadpipe tree file")
        tree = cls()
        tree.n_features = int(head[2])
        nodes: dict[int, _Node] = {}
        links: dict[int, tuple[int, int]] = {}
        for line in lines[1:]:
            parts = line.split()
            node_id = int(parts[0])
            if parts[1] == "leaf":
                nodes[node_id] = _Node(score=float(parts[2]))
            elif parts[1] == "split":
                nodes[node_id] = _Node(feature=int(parts[2]), threshold=float(parts[3]))
                links[node_id] = (int(parts[4]), int(parts[5]))
            else:
                raise DataError(f"bad tree node line: {line!r}")
        for node_id, (left_id, right_id) in links.items():
            nodes[node_id].left = nodes[left_id]
            nodes[node_id].right = nodes[right_id]
        tree.root = nodes[0]
        return tree

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DecisionTree":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


class RandomForest:
    """Bagged CART trees with per-split random feature subsets; the ensemble
    score is the mean of tree scores. Per-tree seeds are drawn up front from
    the forest stream (xor-with-index would collide: nearby forest seeds
    yield the same seed set, and a mean ensemble ignores tree order), so
    results do not depend on fit order."""

    def __init__(self, config: ForestConfig | None = None):
        self.config = config or ForestConfig()
        self.trees: list[DecisionTree] = []

    def fit(self, features: np.ndarray, labels: np.ndarray, seed: int) -> "RandomForest":
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        n, d = features.shape
        cfg = self.config
        subsample = cfg.feature_subsample
        if subsample is None:
            subsample = int(np.ceil(np.sqrt(d)))
        subsample = min(subsample, d)
        tree_cfg = TreeConfig(max_depth=cfg.max_depth, min_samples_split=cfg.min_samples_split)
        self.trees = []
        tree_seeds = Prng(seed).integers(2 ** 63, size=cfg.n_trees)
        for t in range(cfg.n_trees):
            rng = Prng(int(tree_seeds[t]))
            idx = rng.integers(n, size=n) if cfg.bootstrap else np.arange(n)
            tree = DecisionTree(tree_cfg)
            tree.fit(features[idx], labels[idx], feature_rng=rng,
                     feature_subsample=subsample)
            self.trees.append(tree)
        return self

    def predict_scores(self, features: np.ndarray) -> np.ndarray:
        if not self.trees:
            raise DataError("forest is not fitted")
        total = np.zeros(np.asarray(features).shape[0])
        for tree in self.trees:
            total += tree.predict_scores(features)
        return total / len(self.trees)

    def to_text(self) -> str:
        if not self.trees:
            raise DataError("forest is not fitted")
        return (
            f"cadpipe-forest 1 {len(self.trees)}\n"
            + "".join(tree.to_text() for tree in self.trees)
        )

    @classmethod
    def from_text(cls, text: str) -> "RandomForest":
        lines = text.splitlines()
        head = lines[0].split()
        if len(head) != 3 or head[0] != "cadpipe-forest" or head[1] != "1":
            raise DataError("not a cadpipe forest file")
        blocks: list[list[str]] = []
        for line in lines[1:]:
            if line.startswith("cadpipe-tree"):
                blocks.append([line])
            elif line.strip():
                blocks[-1].append(line)
        if len(blocks) != int(head[2]):
            raise DataError(f"expected {head[2]} trees, found {len(blocks)}")
        forest = cls()
        forest.trees = [DecisionTree.from_text("\n".join(b)) for b in blocks]
        return forest

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RandomForest":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))
