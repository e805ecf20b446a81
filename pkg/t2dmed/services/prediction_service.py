"""
Medication prediction for a single new patient from a saved model.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from t2dmed.models.table import Column, ColumnSchema, Table
from t2dmed.models.trained_model import TrainedModel
from t2dmed.services.model_service import model_service
from t2dmed.services.model_store import model_store
from t2dmed.services.preprocess_service import feature_schema, preprocess_service
from t2dmed.services.tabular_service import MISSING_TOKENS
from t2dmed.utils.errors import DataError, MissingFeatureError, ParameterError, ParseError

logger = logging.getLogger(__name__)


@dataclass
class PredictionResult:
    """Predicted medication and, where the model defines them, class probabilities."""
    kind: str
    medication: str
    probabilities: Optional[Dict[str, float]] = None

    def to_dict(self) -> Dict[str, object]:
        return {'kind': self.kind, 'medication': self.medication, 'probabilities': self.probabilities}


def parse_assignments(pairs: Sequence[str]) -> Dict[str, str]:
    """Turn ``key=value`` strings into a dict; the key may contain spaces."""
    values: Dict[str, str] = {}
    for pair in pairs:
        if '=' not in pair:
            raise ParameterError(f"Expected key=value, got '{pair}'")
        key, value = pair.split('=', 1)
        values[key.strip()] = value.strip()
    return values


class PredictionService:
    """Replays a model's preprocessing on one patient and predicts."""

    def read_row_csv(self, path: Union[str, Path]) -> Dict[str, str]:
        """The single data row of a CSV file, as column -> raw cell text."""
        path = Path(path)
        if not path.exists():
            raise DataError(f"Row file not found: {path}")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding='utf-8')
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise DataError(f"Row file {path} is not a readable CSV: {e}") from e
        if len(frame) != 1:
            raise DataError(f"Row file {path} must contain exactly one data row, found {len(frame)}")
        return {str(name): str(frame.iloc[0][name]) for name in frame.columns}

    def build_row(self, model: TrainedModel, values: Mapping[str, str]) -> Table:
        """
        One-row Table holding the raw features the model needs.

        Raises:
            MissingFeatureError: lists every required feature absent from ``values``
        """
        if model.preprocess is None:
            raise DataError(f"Model '{model.kind}' carries no preprocessing state")
        schema: List[ColumnSchema] = feature_schema(model.preprocess)
        missing = [col.name for col in schema if col.name not in values]
        if missing:
            raise MissingFeatureError(missing)

        columns = {}
        for col in schema:
            cell = str(values[col.name]).strip()
            if col.kind == 'numeric':
                if cell in MISSING_TOKENS:
                    columns[col.name] = Column.numeric([np.nan], [True])
                    continue
                try:
                    number = float(cell)
                except ValueError:
                    raise ParseError(f"Cannot parse '{cell}' as a number", 1, col.name)
                if not math.isfinite(number):
                    raise ParseError(f"Non-finite value '{cell}'", 1, col.name)
                columns[col.name] = Column.numeric([number])
            else:
                columns[col.name] = Column.categorical([None if cell in MISSING_TOKENS else cell])
        return Table(schema, columns)

    def predict_values(self, model: TrainedModel, values: Mapping[str, str]) -> PredictionResult:
        row = self.build_row(model, values)
        prepared = preprocess_service.transform(row, model.preprocess, with_labels=False)
        label = str(model_service.predict(model, prepared.features)[0])
        proba = model_service.predict_proba(model, prepared.features)
        probabilities = None
        if proba is not None:
            probabilities = {c: float(p) for c, p in zip(model.class_labels, proba[0])}
        logger.info(f"{model.kind} predicts '{label}'")
        return PredictionResult(kind=model.kind, medication=label, probabilities=probabilities)

    def predict_patient(self, model_path: Union[str, Path], row_csv: Optional[Union[str, Path]] = None,
                        assignments: Optional[Sequence[str]] = None) -> PredictionResult:
        """
        Predict from a single-row CSV file or from ``key=value`` pairs.

        Args:
            model_path: Saved model file
            row_csv: CSV with a header and one data row
            assignments: ``feature=value`` strings

        Returns:
            PredictionResult
        """
        if (row_csv is None) == (not assignments):
            raise ParameterError("Provide exactly one of a row CSV or key=value assignments")
        model = model_store.load_model(model_path)
        values = self.read_row_csv(row_csv) if row_csv is not None else parse_assignments(assignments)
        return self.predict_values(model, values)


# Global service instance
prediction_service = PredictionService()
