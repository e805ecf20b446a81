"""
Uniform fit / predict over all eight model kinds.
"""
import logging
from typing import Optional, Sequence, Union

import numpy as np

from t2dmed.config.pipeline_config import ClassifierSpec, NetworkConfig, PreprocessConfig
from t2dmed.models.table import Table
from t2dmed.models.trained_model import TrainedModel
from t2dmed.services.classic import classifier_registry
from t2dmed.services.neural_service import neural_service
from t2dmed.services.preprocess_service import preprocess_service

logger = logging.getLogger(__name__)

ModelSpec = Union[ClassifierSpec, NetworkConfig]


class ModelService:
    """Dispatches to the classical registry or the neural service by kind."""

    def fit(self, spec: ModelSpec, features, labels: Sequence[str],
            seed: Optional[int] = None) -> TrainedModel:
        if isinstance(spec, NetworkConfig):
            return neural_service.fit(spec, features, labels, seed)
        return classifier_registry.fit(spec, features, labels, seed)

    def fit_table(self, spec: ModelSpec, table: Table, preprocess: Optional[PreprocessConfig] = None,
                  seed: Optional[int] = None) -> TrainedModel:
        """Fit preprocessing and the model on ``table``; the state travels with the model."""
        state, prepared = preprocess_service.fit_transform(table, preprocess)
        model = self.fit(spec, prepared.features, prepared.labels, seed)
        model.preprocess = state
        return model

    def predict(self, model: TrainedModel, features) -> np.ndarray:
        """Class labels as an object array."""
        if model.kind == 'ann':
            return neural_service.predict(model.params, features, model.class_labels)
        return classifier_registry.predict(model, features)

    def predict_proba(self, model: TrainedModel, features) -> Optional[np.ndarray]:
        """Per-class probabilities in class_labels order, None when undefined."""
        if model.kind == 'ann':
            probs, _ = neural_service.forward(model.params, features)
            return probs
        return classifier_registry.predict_proba(model, features)

    def predict_table(self, model: TrainedModel, table: Table) -> np.ndarray:
        """Replay the model's preprocessing on raw rows, then predict."""
        prepared = preprocess_service.transform(table, model.preprocess, with_labels=False)
        return self.predict(model, prepared.features)


# Global service instance
model_service = ModelService()
