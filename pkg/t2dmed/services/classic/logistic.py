"""
Multinomial logistic regression trained by full-batch gradient descent.
"""
import logging
from typing import Any, Dict

import numpy as np

from t2dmed.models.trained_model import LinearParams
from t2dmed.services.classic.base import one_hot, softmax_rows

logger = logging.getLogger(__name__)


def fit_logistic(features: np.ndarray, codes: np.ndarray, n_classes: int,
                 hyperparameters: Dict[str, Any]) -> LinearParams:
    """
    Softmax regression on mean cross-entropy with L2 penalty on the weights.

    Weights and biases start at zero, so training is fully deterministic.
    """
    lr = float(hyperparameters['learning_rate'])
    epochs = int(hyperparameters['epochs'])
    l2 = float(hyperparameters['l2'])
    n, d = features.shape
    targets = one_hot(codes, n_classes)
    weights = np.zeros((n_classes, d))
    bias = np.zeros(n_classes)

    for epoch in range(epochs):
        probs = softmax_rows(features @ weights.T + bias)
        error = (probs - targets) / n
        grad_w = error.T @ features + l2 * weights
        grad_b = error.sum(axis=0)
        weights -= lr * grad_w
        bias -= lr * grad_b

    logger.debug(f"Logistic regression trained for {epochs} epochs on {n} rows")
    return LinearParams(weights=weights, bias=bias)


def logistic_proba(params: LinearParams, features: np.ndarray) -> np.ndarray:
    return softmax_rows(features @ params.weights.T + params.bias)
