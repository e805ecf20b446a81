"""
Gaussian naive Bayes.
"""
from typing import Any, Dict

import numpy as np

from t2dmed.models.trained_model import GaussianNbParams


def fit_naive_bayes(features: np.ndarray, codes: np.ndarray, n_classes: int,
                    hyperparameters: Dict[str, Any]) -> GaussianNbParams:
    """Per-class means and population variances floored at var_floor."""
    floor = float(hyperparameters['var_floor'])
    n = features.shape[0]
    counts = np.bincount(codes, minlength=n_classes)
    means = np.vstack([features[codes == c].mean(axis=0) for c in range(n_classes)])
    variances = np.vstack([
        np.mean((features[codes == c] - means[c]) ** 2, axis=0) for c in range(n_classes)
    ])
    return GaussianNbParams(means=means, variances=np.maximum(variances, floor),
                            log_priors=np.log(counts / n))


def naive_bayes_log_joint(params: GaussianNbParams, features: np.ndarray) -> np.ndarray:
    """log P(c) + sum_j log N(x_j | mu_cj, var_cj) for every row and class."""
    scores = np.empty((features.shape[0], params.means.shape[0]))
    for c in range(params.means.shape[0]):
        var = params.variances[c]
        sq = (features - params.means[c]) ** 2 / var
        scores[:, c] = params.log_priors[c] - 0.5 * np.sum(np.log(2.0 * np.pi * var) + sq, axis=1)
    return scores


def naive_bayes_proba(params: GaussianNbParams, features: np.ndarray) -> np.ndarray:
    joint = naive_bayes_log_joint(params, features)
    peak = joint.max(axis=1, keepdims=True)
    log_norm = peak + np.log(np.sum(np.exp(joint - peak), axis=1, keepdims=True))
    return np.exp(joint - log_norm)
