"""
Shared helpers for the classical classifiers.
"""
from typing import List, Sequence, Tuple

import numpy as np

from t2dmed.utils.errors import DegenerateLabelsError, ShapeError


def encode_targets(labels: Sequence[str], require_two: bool = True) -> Tuple[np.ndarray, List[str]]:
    """Class indices and class labels in order of first appearance."""
    class_labels = list(dict.fromkeys(str(label) for label in labels))
    if require_two and len(class_labels) < 2:
        raise DegenerateLabelsError(f"Need at least two classes, got {len(class_labels)}")
    lookup = {c: i for i, c in enumerate(class_labels)}
    return np.array([lookup[str(label)] for label in labels], dtype=np.int64), class_labels


def as_matrix(features, n_features: int = None) -> np.ndarray:
    matrix = np.asarray(features, dtype=np.float64)
    if matrix.ndim != 2:
        raise ShapeError(f"Expected a 2-D feature matrix, got shape {matrix.shape}")
    if n_features is not None and matrix.shape[1] != n_features:
        raise ShapeError(f"Model expects {n_features} features, got {matrix.shape[1]}")
    return matrix


def one_hot(codes: np.ndarray, n_classes: int) -> np.ndarray:
    matrix = np.zeros((len(codes), n_classes))
    matrix[np.arange(len(codes)), codes] = 1.0
    return matrix


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def argmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties resolve to the lowest class index."""
    return np.argmax(scores, axis=1)
