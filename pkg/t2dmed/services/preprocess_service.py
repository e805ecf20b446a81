"""
Preprocessing pipeline: fit on training rows, replay on any other rows.

Order: impute -> encode -> select -> scale, plus a PCA fit on the scaled
training features that is only used for the 2-D visualization.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import numpy as np

from t2dmed.config.pipeline_config import PreprocessConfig
from t2dmed.models.preprocess_state import PreprocessState
from t2dmed.models.table import ColumnSchema, Table
from t2dmed.services.feature_service import feature_service
from t2dmed.services.tabular_service import tabular_service
from t2dmed.utils.errors import DataError, MissingFeatureError

logger = logging.getLogger(__name__)


@dataclass
class PreparedData:
    """Model-ready matrix and labels."""
    features: np.ndarray
    labels: List[str]
    row_ids: np.ndarray


class PreprocessService:
    """Fits and replays PreprocessState over tables."""

    def fit(self, table: Table, config: Optional[PreprocessConfig] = None) -> PreprocessState:
        """
        Fit every preprocessing step on ``table`` (the training rows).

        Args:
            table: Training table with one target column
            config: Preprocessing choices (defaults when omitted)

        Returns:
            Fitted PreprocessState, including its FeatureReport
        """
        config = config or PreprocessConfig()
        target = table.target_name()
        labels = self._target_labels(table, target)
        raw_features = [c for c in table.schema if c.role == 'feature']
        if not raw_features:
            raise DataError("Table has no feature columns")

        impute_values: Dict[str, Union[float, str]] = {}
        work = table
        for col in raw_features:
            if col.kind == 'numeric':
                value = tabular_service.impute_value(work, col.name, config.imputation)
            else:
                value = tabular_service.mode_value(work, col.name)
            impute_values[col.name] = value
            work = tabular_service.fill_missing(work, col.name, value)

        encoders = []
        for col in raw_features:
            if col.kind == 'categorical':
                mode = config.encoding_overrides.get(col.name, config.encoding)
                enc = tabular_service.fit_encoder(work, col.name, mode)
                encoders.append(enc)
                work = tabular_service.apply_encoder(work, enc)

        encoded = [c for c in work.schema if c.role == 'feature']
        names = [c.name for c in encoded]
        matrix = work.matrix(names)
        report = feature_service.select_features(
            matrix, labels,
            p_threshold=config.p_threshold,
            corr_threshold=config.corr_threshold,
            names=names,
            categorical=[c.encoded_from is not None for c in encoded],
        )
        selected_idx = [names.index(n) for n in report.selected]
        selected = matrix[:, selected_idx]

        scaler = feature_service.min_max_fit(selected) if config.scaling else None
        model_input = feature_service.min_max_transform(selected, scaler) if scaler else selected

        pca = None
        if model_input.shape[0] >= 2:
            k = min(config.pca_components, model_input.shape[1])
            pca = feature_service.pca_fit(model_input, k)

        logger.info(f"Fitted preprocessing on {table.n_rows} rows: "
                    f"{len(encoded)} encoded features, {len(report.selected)} selected")
        return PreprocessState(
            raw_features=raw_features,
            target=target,
            impute_values=impute_values,
            encoders=encoders,
            encoded_features=encoded,
            selected_features=list(report.selected),
            scaler=scaler,
            pca=pca,
            feature_report=report,
        )

    def transform(self, table: Table, state: PreprocessState, with_labels: bool = True) -> PreparedData:
        """
        Replay fitted preprocessing on ``table``.

        Only the raw columns feeding selected features are required; a
        table lacking any of them raises MissingFeatureError listing all.
        """
        required = state.required_inputs()
        missing = [name for name in required if name not in table.columns]
        if missing:
            raise MissingFeatureError(missing)

        work = table
        for name in required:
            work = tabular_service.fill_missing(work, name, state.impute_values[name])
            enc = state.encoder_for(name)
            if enc is not None:
                work = tabular_service.apply_encoder(work, enc)

        features = work.matrix(state.selected_features)
        if state.scaler is not None:
            features = feature_service.min_max_transform(features, state.scaler)
        labels = self._target_labels(table, state.target) if with_labels else []
        return PreparedData(features=features, labels=labels, row_ids=np.asarray(table.row_ids))

    def fit_transform(self, table: Table, config: Optional[PreprocessConfig] = None):
        state = self.fit(table, config)
        return state, self.transform(table, state)

    def project(self, features: np.ndarray, state: PreprocessState) -> np.ndarray:
        """2-D (or k-D) PCA coordinates of model-ready rows."""
        if state.pca is None:
            return np.zeros((features.shape[0], 0))
        return feature_service.pca_transform(features, state.pca)

    def _target_labels(self, table: Table, target: str) -> List[str]:
        column = table.column(target)
        if column.missing.any():
            raise DataError(f"Target column '{target}' has {int(column.missing.sum())} missing cells")
        return [str(v) if not isinstance(v, float) else repr(v) for v in column.values]


def feature_schema(state: PreprocessState) -> List[ColumnSchema]:
    """Raw feature columns a prediction input must provide."""
    required = set(state.required_inputs())
    return [c for c in state.raw_features if c.name in required]


# Global service instance
preprocess_service = PreprocessService()
