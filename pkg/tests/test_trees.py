"""
Entropy decision trees and random forests.
"""
import numpy as np
import pytest

from t2dmed.models.trained_model import ForestParams, TreeNode
from t2dmed.services.classic.trees import (
    best_split, entropy, features_per_split, fit_decision_tree, fit_random_forest,
    forest_votes, grow_tree, tree_predict,
)
from t2dmed.utils.errors import ParameterError

TREE_DEFAULTS = {'max_depth': None, 'min_split': 2}
XOR = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
XOR_CODES = np.array([0, 1, 1, 0])


class TestEntropy:

    def test_pure(self):
        assert entropy([5, 0]) == 0.0

    def test_balanced_binary(self):
        assert entropy([3, 3]) == pytest.approx(1.0)

    def test_four_even_classes(self):
        assert entropy([1, 1, 1, 1]) == pytest.approx(2.0)


class TestSplits:

    def test_perfect_split_gain_equals_parent_entropy(self):
        features = np.array([[1.0], [2.0], [3.0], [10.0], [11.0], [12.0]])
        codes = np.array([0, 0, 0, 1, 1, 1])
        feature, threshold, gain = best_split(features, codes, 2, [0])
        assert feature == 0
        assert threshold == 6.5
        assert gain == pytest.approx(entropy([3, 3]))

    def test_constant_features_give_no_split(self):
        assert best_split(np.ones((4, 2)), np.array([0, 1, 0, 1]), 2, [0, 1]) is None

    def test_feature_tie_keeps_lower_index(self):
        features = np.column_stack([[0.0, 0.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]])
        feature, _, _ = best_split(features, np.array([0, 0, 1, 1]), 2, [1, 0])
        assert feature == 0


class TestDecisionTree:

    def test_pure_labels_make_a_leaf(self):
        params = fit_decision_tree(np.random.default_rng(0).normal(size=(6, 3)), np.zeros(6, dtype=np.int64),
                                   1, TREE_DEFAULTS)
        assert params.root.is_leaf
        assert params.root.label == 0
        assert params.root.counts == [6]

    def test_xor(self):
        params = fit_decision_tree(XOR, XOR_CODES, 2, TREE_DEFAULTS)
        assert params.root.depth() == 2
        assert tree_predict(params.root, XOR).tolist() == XOR_CODES.tolist()

    def test_depth_limit(self):
        root = grow_tree(XOR, XOR_CODES, 2, max_depth=1)
        assert root.depth() == 1

    def test_min_split(self):
        root = grow_tree(XOR, XOR_CODES, 2, min_split=5)
        assert root.is_leaf

    def test_invalid_min_split(self):
        with pytest.raises(ParameterError):
            grow_tree(XOR, XOR_CODES, 2, min_split=1)

    def test_serialized_tree_predicts_the_same(self):
        features = np.random.default_rng(2).normal(size=(60, 3))
        codes = (features[:, 0] + features[:, 1] > 0).astype(np.int64)
        root = grow_tree(features, codes, 2)
        restored = TreeNode.from_dict(root.to_dict())
        assert tree_predict(restored, features).tolist() == tree_predict(root, features).tolist()

    def test_perfect_training_fit_without_depth_limit(self, four_class_matrix):
        features, labels = four_class_matrix
        codes = np.array([int(label[-1]) for label in labels])
        root = grow_tree(features, codes, 4)
        assert tree_predict(root, features).tolist() == codes.tolist()


class TestRandomForest:

    def test_single_full_tree_reduces_to_decision_tree(self, four_class_matrix):
        features, labels = four_class_matrix
        codes = np.array([int(label[-1]) for label in labels])
        forest = fit_random_forest(features, codes, 4, {
            'n_trees': 1, 'bootstrap': False, 'max_features': 'all', 'max_depth': None, 'min_split': 2,
        }, seed=5)
        tree = fit_decision_tree(features, codes, 4, TREE_DEFAULTS)
        queries = np.random.default_rng(8).normal(scale=3.0, size=(50, 5))
        assert tree_predict(forest.trees[0], queries).tolist() == tree_predict(tree.root, queries).tolist()

    @pytest.mark.parametrize('index', range(10))
    def test_single_tree_forest_matches_tree(self, index):
        rng = np.random.default_rng(200 + index)
        n, d, n_classes = 30 + 12 * index, 2 + index % 5, 2 + index % 3
        features = rng.normal(size=(n, d))
        if index % 2:
            features = np.round(features * 2.0)
        codes = rng.integers(0, n_classes, size=n)
        hp = {'n_trees': 1, 'bootstrap': False, 'max_features': 'all', 'max_depth': None, 'min_split': 2}

        forest = fit_random_forest(features, codes, n_classes, hp, seed=index)
        tree = fit_decision_tree(features, codes, n_classes, TREE_DEFAULTS)
        assert forest.trees[0].to_dict() == tree.root.to_dict()
        queries = rng.normal(scale=2.0, size=(40, d))
        votes = forest_votes(forest, queries, n_classes)
        assert np.argmax(votes, axis=1).tolist() == tree_predict(tree.root, queries).tolist()

    def test_majority_vote(self):
        def leaf(label):
            return TreeNode(label=label, counts=[1 if c == label else 0 for c in range(2)])

        votes = forest_votes(ForestParams([leaf(0), leaf(0), leaf(1)]), np.zeros((1, 1)), 2)
        assert votes.tolist() == [[2.0, 1.0]]
        assert int(np.argmax(votes[0])) == 0

    def test_seeded(self, four_class_matrix):
        features, labels = four_class_matrix
        codes = np.array([int(label[-1]) for label in labels])
        hp = {'n_trees': 4, 'bootstrap': True, 'max_features': 'sqrt', 'max_depth': 6, 'min_split': 2}
        a = fit_random_forest(features, codes, 4, hp, seed=3)
        b = fit_random_forest(features, codes, 4, hp, seed=3)
        c = fit_random_forest(features, codes, 4, hp, seed=4)
        assert [t.to_dict() for t in a.trees] == [t.to_dict() for t in b.trees]
        assert [t.to_dict() for t in a.trees] != [t.to_dict() for t in c.trees]

    @pytest.mark.parametrize('setting, expected', [('sqrt', 3), ('all', 7), ('log2', 3), (2, 2), (0.5, 4)])
    def test_features_per_split(self, setting, expected):
        assert features_per_split(setting, 7) == expected

    def test_invalid_features_per_split(self):
        with pytest.raises(ParameterError):
            features_per_split(9, 7)
