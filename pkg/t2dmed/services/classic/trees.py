"""
Entropy decision trees and bagged random forests.

Splits test ``x[feature] <= threshold`` with thresholds at midpoints between
consecutive distinct sorted values. An impure node is always split when any
candidate exists, even at zero information gain, so parity-style labels
remain learnable.
"""
import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from t2dmed.models.trained_model import ForestParams, TreeNode, TreeParams
from t2dmed.utils.errors import ParameterError
from t2dmed.utils.rng import XorShift64Star, derive_seed

logger = logging.getLogger(__name__)

FeatureSampler = Callable[[int], List[int]]


def entropy(counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-np.sum(p * np.log2(p)))


def _entropy_rows(counts: np.ndarray, totals: np.ndarray) -> np.ndarray:
    p = counts / totals[:, None]
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def best_split(features: np.ndarray, codes: np.ndarray, n_classes: int,
               candidate_features: List[int]) -> Optional[Tuple[int, float, float]]:
    """
    Highest-gain (feature, threshold, gain) over the candidate features.

    Ties keep the lower feature index, then the lower threshold. Returns None
    when every candidate feature is constant on these rows.
    """
    m = features.shape[0]
    parent = entropy(np.bincount(codes, minlength=n_classes))
    best = None
    for f in sorted(candidate_features):
        column = features[:, f]
        order = np.argsort(column, kind='stable')
        values = column[order]
        boundaries = np.flatnonzero(values[:-1] < values[1:])
        if len(boundaries) == 0:
            continue
        onehot = np.zeros((m, n_classes))
        onehot[np.arange(m), codes[order]] = 1.0
        left = np.cumsum(onehot, axis=0)[boundaries]
        right = onehot.sum(axis=0) - left
        n_left = (boundaries + 1).astype(np.float64)
        n_right = m - n_left
        gains = parent - (n_left / m) * _entropy_rows(left, n_left) - (n_right / m) * _entropy_rows(right, n_right)
        i = int(np.argmax(gains))
        if best is None or gains[i] > best[2]:
            lo, hi = values[boundaries[i]], values[boundaries[i] + 1]
            threshold = (lo + hi) / 2.0
            if not threshold < hi:
                threshold = lo
            best = (f, float(threshold), float(gains[i]))
    return best


def grow_tree(features: np.ndarray, codes: np.ndarray, n_classes: int,
              max_depth: Optional[int] = None, min_split: int = 2,
              feature_sampler: Optional[FeatureSampler] = None) -> TreeNode:
    """
    Grow a tree depth-first with an explicit stack.

    Args:
        features: Training matrix
        codes: Class index per row
        n_classes: Number of classes, fixes leaf count length
        max_depth: Depth limit, None for unlimited
        min_split: Nodes with fewer rows become leaves
        feature_sampler: Called with the feature count at each split, returns
            the features to consider; all features when None

    Returns:
        Root node
    """
    if min_split < 2:
        raise ParameterError(f"min_split must be >= 2, got {min_split}")
    if max_depth is not None and max_depth < 0:
        raise ParameterError(f"max_depth must be >= 0, got {max_depth}")
    n_features = features.shape[1]
    root = TreeNode()
    stack = [(root, np.arange(features.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = np.bincount(codes[rows], minlength=n_classes)
        split = None
        if (np.count_nonzero(counts) > 1 and len(rows) >= min_split
                and (max_depth is None or depth < max_depth)):
            candidates = feature_sampler(n_features) if feature_sampler else list(range(n_features))
            split = best_split(features[rows], codes[rows], n_classes, candidates)
            if split is None and feature_sampler:
                rest = [f for f in range(n_features) if f not in set(candidates)]
                split = best_split(features[rows], codes[rows], n_classes, rest) if rest else None
        if split is None:
            node.label = int(np.argmax(counts))
            node.counts = [int(c) for c in counts]
            continue
        feature, threshold, _ = split
        go_left = features[rows, feature] <= threshold
        node.feature, node.threshold = feature, threshold
        node.left, node.right = TreeNode(), TreeNode()
        stack.append((node.right, rows[~go_left], depth + 1))
        stack.append((node.left, rows[go_left], depth + 1))
    return root


def tree_leaf_counts(root: TreeNode, features: np.ndarray) -> np.ndarray:
    """Leaf class counts reached by every row."""
    out = None
    stack = [(root, np.arange(features.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        if node.is_leaf:
            if out is None:
                out = np.zeros((features.shape[0], len(node.counts)))
            out[rows] = node.counts
            continue
        go_left = features[rows, node.feature] <= node.threshold
        stack.append((node.left, rows[go_left]))
        stack.append((node.right, rows[~go_left]))
    if out is None:
        return np.zeros((0, 0))
    return out


def tree_predict(root: TreeNode, features: np.ndarray) -> np.ndarray:
    """Leaf label per row."""
    labels = np.zeros(features.shape[0], dtype=np.int64)
    stack = [(root, np.arange(features.shape[0]))]
    while stack:
        node, rows = stack.pop()
        if len(rows) == 0:
            continue
        if node.is_leaf:
            labels[rows] = node.label
            continue
        go_left = features[rows, node.feature] <= node.threshold
        stack.append((node.left, rows[go_left]))
        stack.append((node.right, rows[~go_left]))
    return labels


def fit_decision_tree(features: np.ndarray, codes: np.ndarray, n_classes: int,
                      hyperparameters: Dict[str, Any]) -> TreeParams:
    root = grow_tree(features, codes, n_classes, hyperparameters.get('max_depth'),
                     int(hyperparameters['min_split']))
    logger.debug(f"Decision tree: depth {root.depth()}, {root.n_leaves()} leaves")
    return TreeParams(root=root)


def tree_proba(params: TreeParams, features: np.ndarray) -> np.ndarray:
    counts = tree_leaf_counts(params.root, features)
    return counts / counts.sum(axis=1, keepdims=True)


def features_per_split(max_features: Any, n_features: int) -> int:
    """Resolve max_features ('sqrt', 'all', an int or a fraction) to a count."""
    if max_features in (None, 'all'):
        return n_features
    if max_features == 'sqrt':
        return max(1, math.ceil(math.sqrt(n_features)))
    if max_features == 'log2':
        return max(1, math.ceil(math.log2(n_features))) if n_features > 1 else 1
    if isinstance(max_features, bool):
        raise ParameterError(f"Invalid max_features: {max_features!r}")
    if isinstance(max_features, int):
        if not 1 <= max_features <= n_features:
            raise ParameterError(f"max_features must be in [1, {n_features}], got {max_features}")
        return max_features
    if isinstance(max_features, float) and 0.0 < max_features <= 1.0:
        return max(1, math.ceil(max_features * n_features))
    raise ParameterError(f"Invalid max_features: {max_features!r}")


def _subset_sampler(rng: XorShift64Star, size: int) -> FeatureSampler:
    def sample(n_features: int) -> List[int]:
        if size >= n_features:
            return list(range(n_features))
        pool = list(range(n_features))
        # partial Fisher-Yates
        for i in range(size):
            j = i + rng.randbelow(n_features - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:size])
    return sample


def fit_random_forest(features: np.ndarray, codes: np.ndarray, n_classes: int,
                      hyperparameters: Dict[str, Any], seed: int) -> ForestParams:
    """
    Bagged trees; tree i draws its bootstrap and feature subsets from
    derive_seed(seed, 'tree', i), so the ensemble is reproducible.
    """
    n_trees = int(hyperparameters['n_trees'])
    if n_trees < 1:
        raise ParameterError(f"n_trees must be >= 1, got {n_trees}")
    n, d = features.shape
    size = features_per_split(hyperparameters.get('max_features', 'sqrt'), d)
    trees = []
    for i in range(n_trees):
        rng = XorShift64Star(derive_seed(seed, 'tree', i))
        if hyperparameters.get('bootstrap', True):
            rows = np.array([rng.randbelow(n) for _ in range(n)], dtype=np.int64)
        else:
            rows = np.arange(n)
        trees.append(grow_tree(features[rows], codes[rows], n_classes,
                               hyperparameters.get('max_depth'), int(hyperparameters['min_split']),
                               _subset_sampler(rng, size)))
    logger.debug(f"Random forest: {n_trees} trees, {size} of {d} features per split")
    return ForestParams(trees=trees)


def forest_votes(params: ForestParams, features: np.ndarray, n_classes: int) -> np.ndarray:
    votes = np.zeros((features.shape[0], n_classes))
    for root in params.trees:
        labels = tree_predict(root, features)
        votes[np.arange(features.shape[0]), labels] += 1.0
    return votes


def forest_proba(params: ForestParams, features: np.ndarray, n_classes: int) -> np.ndarray:
    """Vote share per class."""
    return forest_votes(params, features, n_classes) / len(params.trees)
