"""
Trained model records: learned parameters per model kind.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from t2dmed.models.preprocess_state import PreprocessState


def _matrix(data: Dict[str, Any], key: str) -> np.ndarray:
    shape = data[f"{key}_shape"]
    return np.asarray(data[key], dtype=np.float64).reshape(shape)


def _matrix_dict(key: str, value: np.ndarray) -> Dict[str, Any]:
    return {key: value.ravel().tolist(), f"{key}_shape": list(value.shape)}


@dataclass(eq=False)
class LinearParams:
    """Per-class weight rows and biases (logistic, one-vs-rest SVM)."""
    weights: np.ndarray  # classes x features
    bias: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {**_matrix_dict('weights', self.weights), 'bias': self.bias.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LinearParams':
        return cls(_matrix(data, 'weights'), np.asarray(data['bias'], dtype=np.float64))


@dataclass(eq=False)
class LdaParams:
    """Class means, shared precision matrix and log-priors."""
    means: np.ndarray  # classes x features
    precision: np.ndarray  # features x features, inverse pooled covariance
    log_priors: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {**_matrix_dict('means', self.means), **_matrix_dict('precision', self.precision),
                'log_priors': self.log_priors.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'LdaParams':
        return cls(_matrix(data, 'means'), _matrix(data, 'precision'),
                   np.asarray(data['log_priors'], dtype=np.float64))


@dataclass(eq=False)
class KnnParams:
    """Stored training set and neighbourhood settings."""
    train_features: np.ndarray
    train_codes: np.ndarray
    k: int
    p: float

    def to_dict(self) -> Dict[str, Any]:
        return {**_matrix_dict('train_features', self.train_features),
                'train_codes': self.train_codes.tolist(), 'k': self.k, 'p': self.p}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'KnnParams':
        return cls(_matrix(data, 'train_features'), np.asarray(data['train_codes'], dtype=np.int64),
                   int(data['k']), float(data['p']))


@dataclass(eq=False)
class GaussianNbParams:
    """Per-class feature means, floored variances and log-priors."""
    means: np.ndarray
    variances: np.ndarray
    log_priors: np.ndarray

    def to_dict(self) -> Dict[str, Any]:
        return {**_matrix_dict('means', self.means), **_matrix_dict('variances', self.variances),
                'log_priors': self.log_priors.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GaussianNbParams':
        return cls(_matrix(data, 'means'), _matrix(data, 'variances'),
                   np.asarray(data['log_priors'], dtype=np.float64))


@dataclass(eq=False)
class TreeNode:
    """
    Internal node (feature, threshold, left, right) or leaf (label, counts).

    Rows go left iff x[feature] <= threshold.
    """
    feature: Optional[int] = None
    threshold: Optional[float] = None
    left: Optional['TreeNode'] = None
    right: Optional['TreeNode'] = None
    label: Optional[int] = None
    counts: Optional[List[int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.n_leaves() + self.right.n_leaves()

    def to_dict(self) -> Dict[str, Any]:
        if self.is_leaf:
            return {'label': self.label, 'counts': list(self.counts)}
        return {'feature': self.feature, 'threshold': self.threshold,
                'left': self.left.to_dict(), 'right': self.right.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TreeNode':
        if 'label' in data:
            return cls(label=int(data['label']), counts=[int(c) for c in data['counts']])
        return cls(feature=int(data['feature']), threshold=float(data['threshold']),
                   left=cls.from_dict(data['left']), right=cls.from_dict(data['right']))


@dataclass(eq=False)
class TreeParams:
    root: TreeNode

    def to_dict(self) -> Dict[str, Any]:
        return {'root': self.root.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'TreeParams':
        return cls(TreeNode.from_dict(data['root']))


@dataclass(eq=False)
class ForestParams:
    trees: List[TreeNode]

    def to_dict(self) -> Dict[str, Any]:
        return {'trees': [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ForestParams':
        return cls([TreeNode.from_dict(t) for t in data['trees']])


@dataclass(eq=False)
class NetworkParams:
    """Per-layer weights (width_l x width_{l-1}) and biases."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def copy(self) -> 'NetworkParams':
        return NetworkParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def n_parameters(self) -> int:
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    def to_dict(self) -> Dict[str, Any]:
        return {'layers': [
            {'shape': list(w.shape), 'weights': w.ravel().tolist(), 'bias': b.tolist()}
            for w, b in zip(self.weights, self.biases)
        ]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NetworkParams':
        weights, biases = [], []
        for layer in data['layers']:
            weights.append(np.asarray(layer['weights'], dtype=np.float64).reshape(layer['shape']))
            biases.append(np.asarray(layer['bias'], dtype=np.float64))
        return cls(weights, biases)


PARAM_TYPES = {
    'logistic': LinearParams,
    'lda': LdaParams,
    'knn': KnnParams,
    'naive_bayes': GaussianNbParams,
    'decision_tree': TreeParams,
    'random_forest': ForestParams,
    'svm': LinearParams,
    'ann': NetworkParams,
}


@dataclass(eq=False)
class TrainedModel:
    """A fitted model of one of the eight kinds."""
    kind: str
    class_labels: List[str]
    params: Any
    preprocess: Optional[PreprocessState] = None
    hyperparameters: Dict[str, Any] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def __repr__(self):
        return f"<TrainedModel(kind='{self.kind}', classes={self.n_classes})>"
