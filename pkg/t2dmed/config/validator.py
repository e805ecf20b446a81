"""
Pipeline configuration validation.
"""
from pathlib import Path
from typing import Any, Dict, List, Union

from t2dmed.config.pipeline_config import PipelineConfig, config_digest, holdout_size, load_pipeline_config
from t2dmed.utils.errors import T2DMedError


class ConfigValidator:
    """Checks a PipelineConfig beyond what its models enforce."""

    @classmethod
    def validate_data_source(cls, config: PipelineConfig) -> List[str]:
        """Errors that would stop the data from loading."""
        from t2dmed.services.tabular_service import tabular_service

        source = config.data
        if source.csv_path is None:
            return []
        errors = []
        if not Path(source.csv_path).exists():
            errors.append(f"CSV file not found: {source.csv_path}")
        if not Path(source.schema_path).exists():
            errors.append(f"Schema file not found: {source.schema_path}")
            return errors
        try:
            schema = tabular_service.load_schema(source.schema_path)
        except T2DMedError as e:
            errors.append(f"Schema file is invalid: {e}")
            return errors
        targets = [c.name for c in schema if c.role == 'target']
        if len(targets) != 1:
            errors.append(f"Schema must have exactly one target column, found {len(targets)}")
        if not any(c.role == 'feature' for c in schema):
            errors.append("Schema has no feature columns")
        names = {c.name for c in schema}
        categorical = {c.name for c in schema if c.kind == 'categorical'}
        for column in config.preprocess.encoding_overrides:
            if column not in names:
                errors.append(f"encoding_overrides names unknown column '{column}'")
            elif column not in categorical:
                errors.append(f"encoding_overrides names numeric column '{column}'")
        return errors

    @classmethod
    def validate_roster(cls, config: PipelineConfig) -> List[str]:
        """Warnings about the model roster."""
        warnings = []
        if not config.model_kinds():
            warnings.append("Model roster is empty; nothing will be trained")
        if config.network is None:
            warnings.append("Network model is disabled")
        if config.data.generator is not None:
            n_train = config.data.generator.n_rows - holdout_size(config.data.generator.n_rows, config.test_fraction)
            for spec in config.classifiers:
                if spec.kind == 'knn' and int(spec.resolved()['k']) > n_train:
                    warnings.append(f"knn k={spec.resolved()['k']} exceeds the {n_train} training rows")
            if config.run_cv and config.cv_k > n_train:
                warnings.append(f"cv_k={config.cv_k} exceeds the {n_train} training rows")
        return warnings

    @classmethod
    def get_validation_report(cls, config: PipelineConfig) -> Dict[str, Any]:
        """Get detailed validation report."""
        errors = cls.validate_data_source(config)
        return {
            'is_valid': not errors,
            'errors': errors,
            'warnings': cls.validate_roster(config),
            'model_kinds': config.model_kinds(),
            'config_digest': config_digest(config),
        }

    @classmethod
    def validate_file(cls, path: Union[str, Path]) -> Dict[str, Any]:
        """Load a config file and report on it; load failures become errors."""
        try:
            config = load_pipeline_config(path)
        except T2DMedError as e:
            return {'is_valid': False, 'errors': [str(e)], 'warnings': [], 'model_kinds': [],
                    'config_digest': None}
        return cls.get_validation_report(config)
