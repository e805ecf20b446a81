"""
Linear discriminant analysis with a shared, regularized covariance.
"""
from typing import Any, Dict

import numpy as np

from t2dmed.models.trained_model import LdaParams
from t2dmed.services.classic.base import softmax_rows
from t2dmed.utils.errors import DegenerateLabelsError, SingularMatrixError


def fit_lda(features: np.ndarray, codes: np.ndarray, n_classes: int,
            hyperparameters: Dict[str, Any]) -> LdaParams:
    """
    Class means, pooled within-class covariance + reg * I, frequency priors.

    Raises:
        DegenerateLabelsError: a class has fewer than two samples
        SingularMatrixError: covariance not positive definite after regularization
    """
    n, d = features.shape
    counts = np.bincount(codes, minlength=n_classes)
    if counts.min() < 2:
        raise DegenerateLabelsError("LDA needs at least two samples per class")

    means = np.vstack([features[codes == c].mean(axis=0) for c in range(n_classes)])
    centered = features - means[codes]
    pooled = centered.T @ centered / (n - n_classes)
    pooled = pooled + float(hyperparameters['regularization']) * np.eye(d)
    try:
        np.linalg.cholesky(pooled)
        precision = np.linalg.inv(pooled)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"LDA covariance is singular: {e}") from e
    precision = (precision + precision.T) / 2.0
    return LdaParams(means=means, precision=precision, log_priors=np.log(counts / n))


def lda_scores(params: LdaParams, features: np.ndarray) -> np.ndarray:
    """Linear discriminant per class: x'P mu - mu'P mu / 2 + log prior."""
    projected = params.means @ params.precision
    offsets = -0.5 * np.sum(projected * params.means, axis=1) + params.log_priors
    return features @ projected.T + offsets


def lda_proba(params: LdaParams, features: np.ndarray) -> np.ndarray:
    return softmax_rows(lda_scores(params, features))
