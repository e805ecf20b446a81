"""
Experiment configuration models.

The JSON config file maps onto PipelineConfig; unknown keys anywhere in the
document are rejected. Defaults reproduce the reference study: mean
imputation, p < 0.05 selection, 80/20 split, stratified 10-fold CV,
KNN k=5 with Euclidean distance, a 10-tree forest and a six-layer network
at least 32 units wide, trained for 100 epochs with a decaying learning rate.
"""
import hashlib
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from t2dmed.utils.errors import ConfigError

ClassifierKind = Literal['logistic', 'lda', 'knn', 'naive_bayes', 'decision_tree', 'random_forest', 'svm']
EncodingMode = Literal['integer', 'one_hot']

CLASSIFIER_KINDS: List[str] = ['logistic', 'lda', 'knn', 'naive_bayes', 'decision_tree', 'random_forest', 'svm']
NETWORK_KIND = 'ann'
MODEL_KINDS: List[str] = CLASSIFIER_KINDS + [NETWORK_KIND]

# Documented hyperparameter defaults per classifier kind
DEFAULT_HYPERPARAMETERS: Dict[str, Dict[str, Any]] = {
    'logistic': {'learning_rate': 0.1, 'epochs': 500, 'l2': 1e-4},
    'lda': {'regularization': 1e-6},
    'knn': {'k': 5, 'p': 2.0},
    'naive_bayes': {'var_floor': 1e-9},
    'decision_tree': {'max_depth': 12, 'min_split': 2},
    'random_forest': {'n_trees': 10, 'bootstrap': True, 'max_features': 'sqrt',
                      'max_depth': 12, 'min_split': 2},
    'svm': {'reg_lambda': 1e-3, 'epochs': 200},
}

# Network presets: (hidden layer count, epochs)
NETWORK_PRESETS: Dict[str, Dict[str, int]] = {
    'default': {'depth': 6, 'epochs': 100},
    'initial': {'depth': 6, 'epochs': 25},
    'improved': {'depth': 7, 'epochs': 100},
}

# Network settings the experiment config ships with. The bare width rule gives
# 6 units for the cohort's 7 inputs, too narrow for the rule's thresholds.
EXPERIMENT_NETWORK: Dict[str, Any] = {'min_width': 32, 'learning_rate': 0.1, 'lr_decay': 0.98}


class StrictModel(BaseModel):
    """Base model rejecting unknown keys."""
    model_config = ConfigDict(extra='forbid')


class HyperparameterModel(StrictModel):
    """Value types of one classifier's hyperparameters; ranges are checked at fit time."""
    model_config = ConfigDict(extra='forbid', strict=True)


class LogisticHyperparameters(HyperparameterModel):
    learning_rate: float
    epochs: int
    l2: float


class LdaHyperparameters(HyperparameterModel):
    regularization: float


class KnnHyperparameters(HyperparameterModel):
    k: int
    p: float


class NaiveBayesHyperparameters(HyperparameterModel):
    var_floor: float


class TreeHyperparameters(HyperparameterModel):
    max_depth: Optional[int]
    min_split: int


class ForestHyperparameters(TreeHyperparameters):
    n_trees: int
    bootstrap: bool
    max_features: Union[Literal['sqrt', 'log2', 'all'], int, float, None]


class SvmHyperparameters(HyperparameterModel):
    reg_lambda: float
    epochs: int


HYPERPARAMETER_MODELS: Dict[str, type] = {
    'logistic': LogisticHyperparameters,
    'lda': LdaHyperparameters,
    'knn': KnnHyperparameters,
    'naive_bayes': NaiveBayesHyperparameters,
    'decision_tree': TreeHyperparameters,
    'random_forest': ForestHyperparameters,
    'svm': SvmHyperparameters,
}


def holdout_size(n_rows: int, test_fraction: float) -> int:
    """Rows the holdout split assigns to the test set (halves round up)."""
    return int(math.floor(test_fraction * n_rows + 0.5))


class GeneratorSettings(StrictModel):
    """Synthetic cohort settings."""
    n_rows: int = Field(9483, ge=1)
    noise_rate: float = Field(0.05, ge=0.0, lt=1.0)
    missing_rate: float = Field(0.0, ge=0.0, lt=1.0)
    seed: Optional[int] = None


class DataSourceConfig(StrictModel):
    """Either a CSV file with its schema, or generator settings."""
    csv_path: Optional[str] = None
    schema_path: Optional[str] = None
    generator: Optional[GeneratorSettings] = None

    @model_validator(mode='after')
    def _one_source(self) -> 'DataSourceConfig':
        has_csv = self.csv_path is not None or self.schema_path is not None
        if has_csv and self.generator is not None:
            raise ValueError("data source must be either csv_path/schema_path or generator, not both")
        if has_csv and (self.csv_path is None or self.schema_path is None):
            raise ValueError("csv_path and schema_path must be given together")
        if not has_csv and self.generator is None:
            self.generator = GeneratorSettings()
        return self


class PreprocessConfig(StrictModel):
    """Preprocessing choices."""
    imputation: Literal['mean', 'median'] = 'mean'
    encoding: EncodingMode = 'integer'
    encoding_overrides: Dict[str, EncodingMode] = Field(default_factory=dict)
    p_threshold: float = Field(0.05, gt=0.0, le=1.0)
    corr_threshold: float = Field(0.9, gt=0.0, le=1.0)
    scaling: bool = True
    pca_components: int = Field(2, ge=1)


class ClassifierSpec(StrictModel):
    """One classical classifier in the roster."""
    kind: ClassifierKind
    hyperparameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None

    @model_validator(mode='after')
    def _known_hyperparameters(self) -> 'ClassifierSpec':
        allowed = DEFAULT_HYPERPARAMETERS[self.kind]
        unknown = sorted(set(self.hyperparameters) - set(allowed))
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.kind}: {', '.join(unknown)}")
        try:
            HYPERPARAMETER_MODELS[self.kind].model_validate(self.resolved())
        except ValidationError as e:
            raise ValueError(f"invalid hyperparameters for {self.kind}: {format_validation_error(e)}") from None
        return self

    def resolved(self) -> Dict[str, Any]:
        """Hyperparameters with documented defaults filled in."""
        params = dict(DEFAULT_HYPERPARAMETERS[self.kind])
        params.update(self.hyperparameters)
        return params


class NetworkConfig(StrictModel):
    """Feedforward network configuration; unset sizes are resolved from the data."""
    input_dim: Optional[int] = None
    hidden_layers: Optional[List[int]] = None
    output_dim: Optional[int] = None
    learning_rate: float = Field(0.01, ge=0.0)
    lr_decay: float = Field(1.0, gt=0.0, le=1.0)
    epochs: Optional[int] = Field(None, ge=0)
    batch_size: int = Field(32, ge=1)
    seed: Optional[int] = None
    preset: Literal['default', 'initial', 'improved'] = 'default'
    min_width: int = Field(1, ge=1)

    @property
    def kind(self) -> str:
        return NETWORK_KIND

    def resolve(self, input_dim: int, output_dim: int, seed: Optional[int] = None) -> 'NetworkConfig':
        """
        Fill in dimensions, hidden widths and epochs.

        Default hidden widths are ceil((input_dim + output_dim) / 2), raised to
        min_width and repeated for the preset's depth. Epoch e trains with
        learning_rate * lr_decay ** (e - 1).

        Raises:
            ConfigError: if any width is below 1
        """
        preset = NETWORK_PRESETS[self.preset]
        in_dim = self.input_dim if self.input_dim is not None else input_dim
        out_dim = self.output_dim if self.output_dim is not None else output_dim
        if self.hidden_layers is not None:
            hidden = list(self.hidden_layers)
        else:
            width = max(math.ceil((in_dim + out_dim) / 2), self.min_width)
            hidden = [width] * preset['depth']
        resolved = self.model_copy(update={
            'input_dim': in_dim,
            'output_dim': out_dim,
            'hidden_layers': hidden,
            'epochs': self.epochs if self.epochs is not None else preset['epochs'],
            'seed': self.seed if self.seed is not None else (seed if seed is not None else 0),
        })
        resolved.check_widths()
        return resolved

    def check_widths(self) -> None:
        widths = [self.input_dim] + list(self.hidden_layers or []) + [self.output_dim]
        if any(w is None or w < 1 for w in widths):
            raise ConfigError(f"Every layer width must be >= 1 (got {widths})")

    def layer_sizes(self) -> List[int]:
        return [self.input_dim] + list(self.hidden_layers) + [self.output_dim]


def default_roster() -> List[ClassifierSpec]:
    return [ClassifierSpec(kind=kind) for kind in CLASSIFIER_KINDS]


def default_network() -> NetworkConfig:
    return NetworkConfig(**EXPERIMENT_NETWORK)


class PipelineConfig(StrictModel):
    """Full experiment configuration."""
    data: DataSourceConfig = Field(default_factory=DataSourceConfig)
    preprocess: PreprocessConfig = Field(default_factory=PreprocessConfig)
    test_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    cv_k: int = Field(10, ge=2)
    run_cv: bool = True
    classifiers: List[ClassifierSpec] = Field(default_factory=default_roster)
    network: Optional[NetworkConfig] = Field(default_factory=default_network)
    master_seed: int = 0
    output_dir: Optional[str] = None

    @field_validator('classifiers')
    @classmethod
    def _unique_kinds(cls, value: List[ClassifierSpec]) -> List[ClassifierSpec]:
        kinds = [spec.kind for spec in value]
        duplicates = sorted({k for k in kinds if kinds.count(k) > 1})
        if duplicates:
            raise ValueError(f"duplicate classifier kinds: {', '.join(duplicates)}")
        return value

    @model_validator(mode='after')
    def _split_leaves_both_sides(self) -> 'PipelineConfig':
        generator = self.data.generator
        if generator is None:
            return self
        n_test = holdout_size(generator.n_rows, self.test_fraction)
        if n_test < 1 or n_test >= generator.n_rows:
            raise ValueError(f"test_fraction {self.test_fraction} on {generator.n_rows} rows gives {n_test} test rows; "
                             f"the split needs at least one test and one training row")
        return self

    def model_kinds(self) -> List[str]:
        kinds = [spec.kind for spec in self.classifiers]
        if self.network is not None:
            kinds.append(NETWORK_KIND)
        return kinds

    def spec_for(self, kind: str) -> Union[ClassifierSpec, NetworkConfig]:
        if kind == NETWORK_KIND:
            if self.network is None:
                raise ConfigError("network model is not configured")
            return self.network
        for spec in self.classifiers:
            if spec.kind == kind:
                return spec
        raise ConfigError(f"model kind '{kind}' is not in the roster")


def canonical_json(document: Any) -> str:
    """JSON with sorted keys and no insignificant whitespace."""
    return json.dumps(document, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def config_digest(config: PipelineConfig) -> str:
    """SHA-256 of the canonical config document."""
    return hashlib.sha256(canonical_json(config.model_dump(mode='json', exclude={'output_dir'})).encode('utf-8')).hexdigest()


def default_config_document() -> Dict[str, Any]:
    """Fully populated default config, as written by ``config init``."""
    config = PipelineConfig()
    document = config.model_dump(mode='json')
    for spec in document['classifiers']:
        spec['hyperparameters'] = dict(DEFAULT_HYPERPARAMETERS[spec['kind']])
    return document


def parse_pipeline_config(document: Dict[str, Any]) -> PipelineConfig:
    """Validate a config document."""
    try:
        return PipelineConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {format_validation_error(e)}") from e


def load_pipeline_config(path: Union[str, Path]) -> PipelineConfig:
    """Load and validate a JSON config file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {path} is not valid JSON: {e.msg} (byte offset {e.pos})") from e
    if not isinstance(document, dict):
        raise ConfigError(f"Config file {path} must contain a JSON object")
    return parse_pipeline_config(document)


def format_validation_error(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = '.'.join(str(p) for p in item['loc']) or '<root>'
        parts.append(f"{location}: {item['msg']}")
    return '; '.join(parts)
