"""
Dispatch fit / predict / predict_proba over the classical classifier kinds.
"""
import logging
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np

from t2dmed.config.pipeline_config import ClassifierSpec
from t2dmed.models.trained_model import TrainedModel
from t2dmed.services.classic.base import argmax_rows, as_matrix, encode_targets
from t2dmed.services.classic.knn import fit_knn, knn_model_vote
from t2dmed.services.classic.lda import fit_lda, lda_proba, lda_scores
from t2dmed.services.classic.logistic import fit_logistic, logistic_proba
from t2dmed.services.classic.naive_bayes import fit_naive_bayes, naive_bayes_log_joint, naive_bayes_proba
from t2dmed.services.classic.svm import fit_svm, svm_decision
from t2dmed.services.classic.trees import (
    fit_decision_tree, fit_random_forest, forest_proba, forest_votes, tree_predict, tree_proba,
)
from t2dmed.utils.errors import ParameterError, ShapeError

logger = logging.getLogger(__name__)

_FITTERS: Dict[str, Callable] = {
    'logistic': fit_logistic,
    'lda': fit_lda,
    'knn': fit_knn,
    'naive_bayes': fit_naive_bayes,
    'decision_tree': fit_decision_tree,
    'svm': fit_svm,
}


class ClassifierRegistry:
    """Fits and applies the seven classical classifiers."""

    def fit(self, spec: ClassifierSpec, features, labels: Sequence[str],
            seed: Optional[int] = None) -> TrainedModel:
        """
        Fit one classifier on preprocessed features.

        Args:
            spec: Classifier kind and hyperparameters
            features: n x d matrix
            labels: n class labels
            seed: Seed for randomized kinds; spec.seed wins when set

        Returns:
            TrainedModel without preprocessing state attached
        """
        matrix = as_matrix(features)
        if matrix.shape[0] != len(labels):
            raise ShapeError(f"{matrix.shape[0]} feature rows but {len(labels)} labels")
        codes, class_labels = encode_targets(labels)
        hyperparameters = spec.resolved()
        effective_seed = spec.seed if spec.seed is not None else (seed or 0)

        if spec.kind == 'random_forest':
            params = fit_random_forest(matrix, codes, len(class_labels), hyperparameters, effective_seed)
        elif spec.kind in _FITTERS:
            params = _FITTERS[spec.kind](matrix, codes, len(class_labels), hyperparameters)
        else:
            raise ParameterError(f"Unknown classifier kind: {spec.kind}")

        logger.info(f"Trained {spec.kind} on {matrix.shape[0]} rows x {matrix.shape[1]} features")
        return TrainedModel(kind=spec.kind, class_labels=class_labels, params=params,
                            hyperparameters=hyperparameters,
                            metadata={'seed': effective_seed, 'n_features': matrix.shape[1],
                                      'n_train': matrix.shape[0]})

    def scores(self, model: TrainedModel, features) -> np.ndarray:
        """Per-class scores whose argmax is the prediction."""
        matrix = as_matrix(features, _n_features(model))
        kind, params = model.kind, model.params
        if kind == 'logistic':
            return matrix @ params.weights.T + params.bias
        if kind == 'lda':
            return lda_scores(params, matrix)
        if kind == 'naive_bayes':
            return naive_bayes_log_joint(params, matrix)
        if kind == 'svm':
            return svm_decision(params, matrix)
        if kind == 'decision_tree':
            return tree_proba(params, matrix)
        if kind == 'random_forest':
            return forest_votes(params, matrix, model.n_classes)
        raise ParameterError(f"No score function for kind {kind}")

    def predict_codes(self, model: TrainedModel, features) -> np.ndarray:
        if model.kind == 'knn':
            matrix = as_matrix(features, _n_features(model))
            codes, _ = knn_model_vote(model.params, model.n_classes, matrix)
            return codes
        if model.kind == 'decision_tree':
            return tree_predict(model.params.root, as_matrix(features, _n_features(model)))
        return argmax_rows(self.scores(model, features))

    def predict(self, model: TrainedModel, features) -> np.ndarray:
        """Predicted class labels as an object array."""
        codes = self.predict_codes(model, features)
        return np.array([model.class_labels[c] for c in codes], dtype=object)

    def predict_proba(self, model: TrainedModel, features) -> Optional[np.ndarray]:
        """Class probabilities, or None for kinds without them (svm)."""
        matrix = as_matrix(features, _n_features(model))
        kind, params = model.kind, model.params
        if kind == 'logistic':
            return logistic_proba(params, matrix)
        if kind == 'lda':
            return lda_proba(params, matrix)
        if kind == 'naive_bayes':
            return naive_bayes_proba(params, matrix)
        if kind == 'knn':
            _, shares = knn_model_vote(params, model.n_classes, matrix)
            return shares
        if kind == 'decision_tree':
            return tree_proba(params, matrix)
        if kind == 'random_forest':
            return forest_proba(params, matrix, model.n_classes)
        return None


def _n_features(model: TrainedModel) -> Optional[int]:
    params: Any = model.params
    for attr in ('weights', 'means', 'train_features'):
        value = getattr(params, attr, None)
        if isinstance(value, np.ndarray):
            return value.shape[1]
    return model.metadata.get('n_features')


# Global registry instance
classifier_registry = ClassifierRegistry()
