"""
Fitted preprocessing state and feature-selection report.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

import numpy as np

from t2dmed.models.table import ColumnSchema, EncoderMap

PREPROCESS_SCHEMA_VERSION = 1

DropReason = Literal['high_p', 'collinear']


@dataclass(frozen=True, eq=False)
class ScalerState:
    """Per-feature min and max fitted on training rows."""
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def n_features(self) -> int:
        return len(self.mins)

    def to_dict(self) -> Dict[str, Any]:
        return {'min': self.mins.tolist(), 'max': self.maxs.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScalerState':
        return cls(np.asarray(data['min'], dtype=np.float64), np.asarray(data['max'], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class PcaState:
    """Column means, k x d orthonormal components and their eigenvalues."""
    mean_vector: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def explained_variance_ratio(self, total_variance: Optional[float] = None) -> List[float]:
        total = float(np.sum(self.eigenvalues)) if total_variance is None else total_variance
        if total <= 0.0:
            return [0.0] * self.n_components
        return [float(v) / total for v in self.eigenvalues[:self.n_components]]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'mean_vector': self.mean_vector.tolist(),
            'components': self.components.tolist(),
            'eigenvalues': self.eigenvalues.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PcaState':
        return cls(np.asarray(data['mean_vector'], dtype=np.float64),
                   np.asarray(data['components'], dtype=np.float64).reshape(-1, len(data['mean_vector'])),
                   np.asarray(data['eigenvalues'], dtype=np.float64))


@dataclass(frozen=True, eq=False)
class FeatureReport:
    """Outcome of p-value and multicollinearity screening."""
    feature_names: List[str]
    p_values: List[float]
    correlation: np.ndarray
    dropped: List[Tuple[str, DropReason]]
    selected: List[str]

    def reason_for(self, name: str) -> Optional[str]:
        for dropped_name, reason in self.dropped:
            if dropped_name == name:
                return reason
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'features': list(self.feature_names),
            'p_values': [float(p) for p in self.p_values],
            'correlation': self.correlation.tolist(),
            'dropped': [{'name': n, 'reason': r} for n, r in self.dropped],
            'selected': list(self.selected),
        }

    def __repr__(self):
        return f"<FeatureReport(selected={len(self.selected)}, dropped={len(self.dropped)})>"


@dataclass(frozen=True, eq=False)
class PreprocessState:
    """
    Replayable preprocessing fitted on training rows.

    Order of application: impute, encode, select, scale. PCA is kept for
    visualization and is not part of the model input.
    """
    raw_features: List[ColumnSchema]
    target: str
    impute_values: Dict[str, Union[float, str]]
    encoders: List[EncoderMap]
    encoded_features: List[ColumnSchema]
    selected_features: List[str]
    scaler: Optional[ScalerState] = None
    pca: Optional[PcaState] = None
    feature_report: Optional[FeatureReport] = field(default=None, compare=False)

    def required_inputs(self) -> List[str]:
        """Raw feature columns that feed at least one selected feature."""
        sources = set()
        for col in self.encoded_features:
            if col.name in self.selected_features:
                sources.add(col.encoded_from or col.name)
        return [c.name for c in self.raw_features if c.name in sources]

    def encoder_for(self, column: str) -> Optional[EncoderMap]:
        for enc in self.encoders:
            if enc.column == column:
                return enc
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': PREPROCESS_SCHEMA_VERSION,
            'raw_features': [c.to_dict() for c in self.raw_features],
            'target': self.target,
            'impute_values': dict(self.impute_values),
            'encoders': [e.to_dict() for e in self.encoders],
            'encoded_features': [
                {'name': c.name, 'encoded_from': c.encoded_from} for c in self.encoded_features
            ],
            'selected_features': list(self.selected_features),
            'scaler': self.scaler.to_dict() if self.scaler else None,
            'pca': self.pca.to_dict() if self.pca else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PreprocessState':
        raw = [ColumnSchema(c['name'], c['kind'], c['role']) for c in data['raw_features']]
        encoded = [ColumnSchema(c['name'], 'numeric', 'feature', encoded_from=c['encoded_from'])
                   for c in data['encoded_features']]
        return cls(
            raw_features=raw,
            target=data['target'],
            impute_values=dict(data['impute_values']),
            encoders=[EncoderMap.from_dict(e) for e in data['encoders']],
            encoded_features=encoded,
            selected_features=list(data['selected_features']),
            scaler=ScalerState.from_dict(data['scaler']) if data.get('scaler') else None,
            pca=PcaState.from_dict(data['pca']) if data.get('pca') else None,
        )
