"""
Model files: canonical JSON documents with a schema version.

Floats are written with Python's shortest round-trip representation, so a
loaded model reproduces the saved parameters bit for bit.
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Union

from t2dmed.config.pipeline_config import canonical_json
from t2dmed.models.preprocess_state import PreprocessState
from t2dmed.models.trained_model import PARAM_TYPES, TrainedModel
from t2dmed.utils.errors import FormatError, ModelFileError, VersionError

logger = logging.getLogger(__name__)

MODEL_FORMAT = 't2dmed-model'
MODEL_SCHEMA_VERSION = 1
SUPPORTED_SCHEMA_VERSIONS = (1,)


class ModelStore:
    """Saves and loads TrainedModel files."""

    def to_document(self, model: TrainedModel) -> Dict[str, Any]:
        return {
            'format': MODEL_FORMAT,
            'schema_version': MODEL_SCHEMA_VERSION,
            'kind': model.kind,
            'class_labels': list(model.class_labels),
            'hyperparameters': dict(model.hyperparameters),
            'metadata': dict(model.metadata),
            'params': model.params.to_dict(),
            'preprocess': model.preprocess.to_dict() if model.preprocess is not None else None,
        }

    def dumps(self, model: TrainedModel) -> str:
        return canonical_json(self.to_document(model)) + '\n'

    def save_model(self, model: TrainedModel, path: Union[str, Path]) -> Path:
        """Write the model; the file appears atomically or not at all."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + '.tmp')
        tmp.write_bytes(self.dumps(model).encode('utf-8'))
        os.replace(tmp, path)
        logger.info(f"Saved {model.kind} model to {path}")
        return path

    def loads(self, raw: bytes) -> TrainedModel:
        """
        Parse model file bytes.

        Raises:
            FormatError: bytes are not a well-formed model document
            VersionError: schema_version is not supported
        """
        try:
            text = raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise FormatError(f"Model file is not UTF-8: {e.reason}", e.start) from e
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            offset = len(text[:e.pos].encode('utf-8'))
            raise FormatError(f"Model file is not valid JSON: {e.msg}", offset) from e
        if not isinstance(document, dict) or document.get('format') != MODEL_FORMAT:
            raise FormatError("Not a model file", 0)
        version = document.get('schema_version')
        if not isinstance(version, int):
            raise FormatError("Model file has no integer schema_version", 0)
        if version not in SUPPORTED_SCHEMA_VERSIONS:
            raise VersionError(f"Unsupported model schema_version {version} "
                               f"(supported: {', '.join(map(str, SUPPORTED_SCHEMA_VERSIONS))})")
        kind = document.get('kind')
        if kind not in PARAM_TYPES:
            raise FormatError(f"Unknown model kind {kind!r}", 0)
        try:
            params = PARAM_TYPES[kind].from_dict(document['params'])
            preprocess = document.get('preprocess')
            return TrainedModel(
                kind=kind,
                class_labels=[str(c) for c in document['class_labels']],
                params=params,
                preprocess=PreprocessState.from_dict(preprocess) if preprocess else None,
                hyperparameters=dict(document.get('hyperparameters', {})),
                metadata=dict(document.get('metadata', {})),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise FormatError(f"Model file is missing or has malformed fields: {e}", 0) from e

    def load_model(self, path: Union[str, Path]) -> TrainedModel:
        path = Path(path)
        if not path.exists():
            raise ModelFileError(f"Model file not found: {path}")
        model = self.loads(path.read_bytes())
        logger.info(f"Loaded {model.kind} model from {path}")
        return model


# Global store instance
model_store = ModelStore()
