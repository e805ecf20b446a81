"""
Linear SVM, one-vs-rest, trained with full-batch Pegasos sub-gradient steps.
"""
from typing import Any, Dict

import numpy as np

from t2dmed.models.trained_model import LinearParams
from t2dmed.utils.errors import ParameterError


def hinge_loss(weights: np.ndarray, bias: float, features: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Per-sample hinge loss max(0, 1 - y (w.x + b)) for targets in {-1, +1}."""
    margins = targets * (features @ weights + bias)
    return np.maximum(0.0, 1.0 - margins)


def pegasos_binary(features: np.ndarray, targets: np.ndarray, reg_lambda: float, epochs: int):
    """
    Minimize lambda/2 |w|^2 + mean hinge loss with step 1/(lambda t).

    The bias is learned as the weight of an appended constant feature.
    """
    augmented = np.hstack([features, np.ones((features.shape[0], 1))])
    n = augmented.shape[0]
    w = np.zeros(augmented.shape[1])
    for t in range(1, epochs + 1):
        eta = 1.0 / (reg_lambda * t)
        violated = targets * (augmented @ w) < 1.0
        grad = reg_lambda * w - (targets[violated] @ augmented[violated]) / n
        w = w - eta * grad
    return w[:-1], float(w[-1])


def fit_svm(features: np.ndarray, codes: np.ndarray, n_classes: int,
            hyperparameters: Dict[str, Any]) -> LinearParams:
    reg_lambda = float(hyperparameters['reg_lambda'])
    epochs = int(hyperparameters['epochs'])
    if reg_lambda <= 0:
        raise ParameterError(f"reg_lambda must be > 0, got {reg_lambda}")
    weights = np.zeros((n_classes, features.shape[1]))
    bias = np.zeros(n_classes)
    for c in range(n_classes):
        targets = np.where(codes == c, 1.0, -1.0)
        weights[c], bias[c] = pegasos_binary(features, targets, reg_lambda, epochs)
    return LinearParams(weights=weights, bias=bias)


def svm_decision(params: LinearParams, features: np.ndarray) -> np.ndarray:
    return features @ params.weights.T + params.bias
