import numpy as np
import pytest

from cadpipe.dataset import Dataset
from cadpipe.errors import DataError
from cadpipe.rng import Prng
from cadpipe.trees import DecisionTree, ForestConfig, RandomForest, TreeConfig, gini


class TestGini:
    def test_fifty_fifty(self):
        assert gini(5, 10) == pytest.approx(0.5)

    def test_pure_node(self):
        assert gini(10, 10) == 0.0
        assert gini(0, 10) == 0.0

    def test_closed_form(self):
        # 3 of 4 positive: 1 - 0.75^2 - 0.25^2 = 0.375
        assert gini(3, 4) == pytest.approx(0.375)


class TestDecisionTree:
    def test_pure_labels_give_leaf_without_split(self):
        X = np.array([[0.0], [1.0], [2.0]])
        tree = DecisionTree().fit(X, np.array([1, 1, 1]))
        assert tree.root.is_leaf
        assert tree.root.score == 1.0

    def test_simple_threshold_split(self):
        X = np.array([[0.0], [1.0], [10.0], [11.0]])
        y = np.array([0, 0, 1, 1])
        tree = DecisionTree().fit(X, y)
        assert not tree.root.is_leaf
        assert tree.root.threshold == pytest.approx(5.5)  # midpoint of 1 and 10
        assert tree.predict_scores(np.array([[2.0], [10.5]])).tolist() == [0.0, 1.0]

    def test_fully_grown_tree_memorizes_distinct_rows(self):
        rng = Prng(12)
        X = rng.uniform(size=(64, 5))
        y = (rng.uniform(size=64) > 0.5).astype(np.int8)
        cfg = TreeConfig(max_depth=None, min_samples_split=2)
        tree = DecisionTree(cfg).fit(X, y)
        assert np.array_equal((tree.predict_scores(X) >= 0.5).astype(np.int8), y)

    def test_xor_memorized_through_zero_gain_splits(self):
        X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        tree = DecisionTree(TreeConfig(max_depth=None)).fit(X, y)
        assert tree.predict_scores(X).tolist() == [0.0, 1.0, 1.0, 0.0]

    def test_depth_cap_respected(self):
        rng = Prng(5)
        X = rng.uniform(size=(128, 4))
        y = (rng.uniform(size=128) > 0.5).astype(np.int8)
        tree = DecisionTree(TreeConfig(max_depth=2)).fit(X, y)

        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        assert depth(tree.root) <= 2

    def test_mixed_labels_on_identical_rows_become_proportion_leaf(self):
        X = np.zeros((4, 2))
        y = np.array([1, 1, 1, 0])
        tree = DecisionTree(TreeConfig(max_depth=None)).fit(X, y)
        assert tree.root.is_leaf
        assert tree.root.score == pytest.approx(0.75)

    def test_text_round_trip(self):
        rng = Prng(8)
        X = rng.uniform(size=(40, 3))
        y = (X[:, 0] + X[:, 2] > 1.0).astype(np.int8)
        tree = DecisionTree().fit(X, y)
        clone = DecisionTree.from_text(tree.to_text())
        probe = rng.uniform(size=(25, 3))
        assert np.array_equal(clone.predict_scores(probe), tree.predict_scores(probe))

    def test_save_load(self, tmp_path):
        X = np.array([[0.0], [1.0], [2.0], [3.0]])
        y = np.array([0, 0, 1, 1])
        tree = DecisionTree().fit(X, y)
        path = tmp_path / "model.tree"
        tree.save(path)
        clone = DecisionTree.load(path)
        assert np.array_equal(clone.predict_scores(X), tree.predict_scores(X))


class TestRandomForest:
    def test_degenerate_forest_equals_single_tree(self):
        rng = Prng(3)
        X = rng.uniform(size=(60, 4))
        y = (X[:, 1] > 0.5).astype(np.int8)
        cfg = ForestConfig(n_trees=1, bootstrap=False, feature_subsample=4,
                           max_depth=12, min_samples_split=2)
        forest = RandomForest(cfg).fit(X, y, seed=9)
        tree = DecisionTree(TreeConfig(max_depth=12, min_samples_split=2)).fit(X, y)
        assert np.array_equal(forest.predict_scores(X), tree.predict_scores(X))

    def test_scores_are_tree_means(self):
        rng = Prng(4)
        X = rng.uniform(size=(50, 3))
        y = (X.sum(axis=1) > 1.5).astype(np.int8)
        forest = RandomForest(ForestConfig(n_trees=7)).fit(X, y, seed=1)
        manual = np.mean([t.predict_scores(X) for t in forest.trees], axis=0)
        assert np.allclose(forest.predict_scores(X), manual)

    def test_deterministic_given_seed(self):
        rng = Prng(6)
        X = rng.uniform(size=(50, 3))
        y = (X[:, 0] > 0.4).astype(np.int8)
        a = RandomForest(ForestConfig(n_trees=12)).fit(X, y, seed=77)
        b = RandomForest(ForestConfig(n_trees=12)).fit(X, y, seed=77)
        probe = rng.uniform(size=(20, 3))
        assert np.array_equal(a.predict_scores(probe), b.predict_scores(probe))
        c = RandomForest(ForestConfig(n_trees=12)).fit(X, y, seed=78)
        assert not np.array_equal(c.predict_scores(probe), a.predict_scores(probe))

    def test_default_feature_subsample_is_sqrt(self):
        cfg = ForestConfig()
        assert cfg.feature_subsample is None  # resolved to ceil(sqrt(d)) at fit
        rng = Prng(2)
        X = rng.uniform(size=(30, 9))
        y = (X[:, 0] > 0.5).astype(np.int8)
        forest = RandomForest(cfg).fit(X, y, seed=5)
        assert len(forest.trees) == cfg.n_trees

    def test_unfitted_rejects_predict(self):
        with pytest.raises(DataError):
            RandomForest().predict_scores(np.zeros((2, 2)))

    def test_forest_text_round_trip(self, tmp_path):
        rng = Prng(7)
        X = rng.uniform(size=(40, 4))
        y = (X[:, 0] + X[:, 3] > 1.0).astype(np.int8)
        forest = RandomForest(ForestConfig(n_trees=6)).fit(X, y, seed=2)
        path = tmp_path / "model.forest"
        forest.save(path)
        clone = RandomForest.load(path)
        probe = rng.uniform(size=(15, 4))
        assert np.array_equal(clone.predict_scores(probe), forest.predict_scores(probe))
