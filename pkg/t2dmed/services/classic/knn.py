"""
k-nearest-neighbour classification under the Minkowski distance.
"""
from typing import Any, Dict, List, Tuple

import numpy as np

from t2dmed.models.trained_model import KnnParams
from t2dmed.utils.errors import ParameterError, ShapeError

# Queries are processed in blocks so the distance tensor stays small
_BLOCK_ELEMENTS = 4_000_000


def minkowski_distance(a, b, p: float = 2.0) -> float:
    """Minkowski distance between two vectors; p=1 Manhattan, p=2 Euclidean."""
    if p < 1:
        raise ParameterError(f"Minkowski order must be >= 1, got {p}")
    diff = np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64))
    if diff.ndim != 1:
        raise ShapeError("minkowski_distance expects two vectors of equal length")
    return float(_reduce(diff[None, :], p)[0])


def _reduce(diff: np.ndarray, p: float) -> np.ndarray:
    if p == 1:
        return diff.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.sum(diff * diff, axis=-1))
    return np.sum(diff ** p, axis=-1) ** (1.0 / p)


def pairwise_distances(queries: np.ndarray, train: np.ndarray, p: float) -> np.ndarray:
    if queries.shape[1] != train.shape[1]:
        raise ShapeError(f"Query has {queries.shape[1]} features, training set has {train.shape[1]}")
    rows_per_block = max(1, _BLOCK_ELEMENTS // max(1, train.shape[0] * train.shape[1]))
    blocks = []
    for start in range(0, queries.shape[0], rows_per_block):
        chunk = queries[start:start + rows_per_block]
        blocks.append(_reduce(np.abs(chunk[:, None, :] - train[None, :, :]), p))
    if not blocks:
        return np.zeros((0, train.shape[0]))
    return np.vstack(blocks)


def knn_vote(train_features: np.ndarray, train_codes: np.ndarray, n_classes: int,
             queries: np.ndarray, k: int, p: float = 2.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Majority vote among the k nearest training rows.

    Distance ties among neighbours keep the lower training index. Vote ties go
    to the class with the smaller summed neighbour distance, then to the lower
    class index.

    Returns:
        (predicted class indices, vote shares per class)
    """
    n_train = train_features.shape[0]
    if k < 1 or k > n_train:
        raise ParameterError(f"k must be in [1, {n_train}], got {k}")
    distances = pairwise_distances(queries, train_features, p)
    nearest = np.argsort(distances, axis=1, kind='stable')[:, :k]

    predictions = np.zeros(queries.shape[0], dtype=np.int64)
    shares = np.zeros((queries.shape[0], n_classes))
    for row in range(queries.shape[0]):
        neighbour_codes = train_codes[nearest[row]]
        neighbour_dist = distances[row, nearest[row]]
        votes = np.bincount(neighbour_codes, minlength=n_classes)
        shares[row] = votes / k
        tied = np.flatnonzero(votes == votes.max())
        if len(tied) == 1:
            predictions[row] = tied[0]
            continue
        best, best_sum = tied[0], None
        for c in tied:
            total = float(neighbour_dist[neighbour_codes == c].sum())
            if best_sum is None or total < best_sum:
                best, best_sum = c, total
        predictions[row] = best
    return predictions, shares


def knn_predict(train_features, train_labels, queries, k: int, p: float = 2.0) -> List[str]:
    """
    Predict one label per query row from a labelled training set.

    A 1-D query is treated as a single row.
    """
    labels = [str(label) for label in train_labels]
    class_labels = list(dict.fromkeys(labels))
    codes = np.array([class_labels.index(label) for label in labels], dtype=np.int64)
    train = np.asarray(train_features, dtype=np.float64)
    query_matrix = np.asarray(queries, dtype=np.float64)
    if query_matrix.ndim == 1:
        query_matrix = query_matrix.reshape(1, -1)
    if query_matrix.ndim != 2:
        raise ShapeError(f"Queries must be a matrix, got {query_matrix.ndim} dimensions")
    predictions, _ = knn_vote(train, codes, len(class_labels), query_matrix, k, p)
    return [class_labels[int(code)] for code in predictions]


def fit_knn(features: np.ndarray, codes: np.ndarray, n_classes: int,
            hyperparameters: Dict[str, Any]) -> KnnParams:
    k = int(hyperparameters['k'])
    p = float(hyperparameters['p'])
    if k < 1 or k > features.shape[0]:
        raise ParameterError(f"k must be in [1, {features.shape[0]}], got {k}")
    if p < 1:
        raise ParameterError(f"Minkowski order must be >= 1, got {p}")
    return KnnParams(train_features=features.copy(), train_codes=codes.copy(), k=k, p=p)


def knn_model_vote(params: KnnParams, n_classes: int, features: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return knn_vote(params.train_features, params.train_codes, n_classes, features, params.k, params.p)
