"""
End-to-end experiment: load or generate data, split, preprocess, train the
roster, evaluate on the holdout split and by cross-validation, write outputs.

Every stochastic consumer draws its seed from master_seed:
    cohort          derive_seed(master, 'cohort')   (unless the generator sets a seed)
    split           derive_seed(master, 'split')
    folds           derive_seed(master, 'folds')
    model <kind>    derive_seed(master, 'model', kind)
"""
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, TypeVar, Union

from t2dmed.config.pipeline_config import PipelineConfig, config_digest
from t2dmed.config.settings import get_config
from t2dmed.models.report import EvaluationReport, ModelMetrics
from t2dmed.models.table import Table
from t2dmed.models.trained_model import TrainedModel
from t2dmed.services.cohort_generator import cohort_generator
from t2dmed.services.evaluation_service import evaluation_service
from t2dmed.services.model_service import model_service
from t2dmed.services.model_store import model_store
from t2dmed.services.preprocess_service import preprocess_service
from t2dmed.services.report_writer import PcaPoints, report_writer
from t2dmed.services.tabular_service import tabular_service
from t2dmed.utils.errors import StageError
from t2dmed.utils.rng import XorShift64Star, derive_seed

logger = logging.getLogger(__name__)

T = TypeVar('T')

MODELS_DIR = 'models'


def report_timestamp() -> str:
    """ISO-8601 UTC timestamp; SOURCE_DATE_EPOCH when reproducible timestamps are on."""
    settings = get_config()
    if settings.REPRODUCIBLE_TIMESTAMPS:
        moment = datetime.fromtimestamp(settings.SOURCE_DATE_EPOCH, tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.strftime('%Y-%m-%dT%H:%M:%SZ')


class _StageRunner:
    """Runs named stages, records progress and writes a partial report on failure."""

    def __init__(self, output_dir: Optional[Path], metadata: Dict[str, Any]):
        self.output_dir = output_dir
        self.metadata = metadata
        self.completed: List[str] = []

    def run(self, stage: str, func: Callable[[], T]) -> T:
        logger.info(f"Stage '{stage}' started")
        try:
            result = func()
        except Exception as e:
            if self.output_dir is not None:
                report_writer.write_partial(self.output_dir, stage, e, self.completed, self.metadata)
            raise StageError(stage, e) from e
        self.completed.append(stage)
        logger.info(f"Stage '{stage}' finished")
        return result


class ExperimentService:
    """Runs experiments and single-model training from a PipelineConfig."""

    def load_data(self, config: PipelineConfig) -> Table:
        source = config.data
        if source.csv_path is not None:
            schema = tabular_service.load_schema(source.schema_path)
            return tabular_service.load_csv(source.csv_path, schema)
        return cohort_generator.generate_cohort(source.generator, derive_seed(config.master_seed, 'cohort'))

    def split(self, config: PipelineConfig, table: Table) -> Tuple[Table, Table]:
        return tabular_service.split_train_test(table, config.test_fraction,
                                                derive_seed(config.master_seed, 'split'))

    def model_seed(self, config: PipelineConfig, kind: str) -> int:
        return derive_seed(config.master_seed, 'model', kind)

    def train_model(self, config: PipelineConfig, kind: str, table: Optional[Table] = None) -> TrainedModel:
        """
        Fit preprocessing and one model on the training split, as ``run`` does.

        Returns:
            TrainedModel carrying its PreprocessState and the config digest
        """
        spec = config.spec_for(kind)
        table = table if table is not None else self.load_data(config)
        train, _ = self.split(config, table)
        model = model_service.fit_table(spec, train, config.preprocess, self.model_seed(config, kind))
        model.metadata['config_digest'] = config_digest(config)
        return model

    def run_experiment(self, config: PipelineConfig,
                       output_dir: Optional[Union[str, Path]] = None) -> EvaluationReport:
        """
        Run the whole experiment and write its outputs.

        Args:
            config: Validated pipeline configuration
            output_dir: Overrides config.output_dir; nothing is written when
                both are unset

        Returns:
            EvaluationReport with one entry per configured model

        Raises:
            StageError: names the failing stage; keeps the cause's exit code
        """
        target_dir = output_dir or config.output_dir
        out = Path(target_dir) if target_dir else None
        digest = config_digest(config)
        metadata: Dict[str, Any] = {
            'master_seed': config.master_seed,
            'config_digest': digest,
            'timestamp': report_timestamp(),
            'rng': XorShift64Star.VERSION,
        }
        stages = _StageRunner(out, metadata)

        table = stages.run('load', lambda: self.load_data(config))
        train, test = stages.run('split', lambda: self.split(config, table))

        def preprocess():
            fitted = preprocess_service.fit(train, config.preprocess)
            return fitted, preprocess_service.transform(train, fitted), preprocess_service.transform(test, fitted)

        state, train_data, test_data = stages.run('preprocess', preprocess)

        class_labels = list(dict.fromkeys(train_data.labels + test_data.labels))
        kinds = config.model_kinds()

        def fit_all() -> Dict[str, TrainedModel]:
            models = {}
            for kind in kinds:
                model = model_service.fit(config.spec_for(kind), train_data.features, train_data.labels,
                                          self.model_seed(config, kind))
                model.preprocess = state
                model.metadata['config_digest'] = digest
                models[kind] = model
            return models

        models = stages.run('train', fit_all)

        def evaluate() -> List[ModelMetrics]:
            entries = []
            for kind in kinds:
                model = models[kind]
                holdout = evaluation_service.compute_metrics(
                    model_service.predict(model, test_data.features), test_data.labels, class_labels)
                train_accuracy = evaluation_service.accuracy(
                    model_service.predict(model, train_data.features), train_data.labels)
                logger.info(f"{kind}: holdout accuracy {holdout.accuracy:.4f}, train accuracy {train_accuracy:.4f}")
                entries.append(ModelMetrics(kind=kind, holdout=holdout, train_accuracy=train_accuracy))
            return entries

        entries = stages.run('evaluate', evaluate)

        warnings: List[str] = []
        if config.run_cv:
            def cross_validate() -> None:
                plan = evaluation_service.stratified_k_fold(
                    train.labels(), config.cv_k, derive_seed(config.master_seed, 'folds'))
                warnings.extend(plan.warnings)
                for entry in entries:
                    entry.fold_accuracies = evaluation_service.cross_validate(
                        config.spec_for(entry.kind), train, plan, preprocess=config.preprocess,
                        seed=self.model_seed(config, entry.kind))
            stages.run('cross_validate', cross_validate)

        report_metadata = dict(metadata)
        report_metadata.update({
            'n_rows': table.n_rows,
            'n_train': train.n_rows,
            'n_test': test.n_rows,
            'cv': {'k': config.cv_k if config.run_cv else None, 'scope': 'training split'},
            'features': state.feature_report.to_dict() if state.feature_report else None,
            'selected_features': list(state.selected_features),
            'pca_explained_variance_ratio': state.pca.explained_variance_ratio() if state.pca else [],
            'warnings': warnings,
        })
        report = EvaluationReport(class_labels=class_labels, models=entries, metadata=report_metadata)
        best = report.best()
        logger.info(f"Best model: {best.kind} ({best.accuracy:.4f} holdout accuracy)")

        if out is not None:
            def write() -> None:
                pca = None
                if state.pca is not None:
                    points = preprocess_service.project(test_data.features, state)
                    predicted = model_service.predict(models[best.kind], test_data.features)
                    pca = PcaPoints(points=points, labels=[str(p) for p in predicted],
                                    explained_variance_ratio=state.pca.explained_variance_ratio())
                report_writer.write_report(report, pca, out)
                for kind, model in models.items():
                    model_store.save_model(model, out / MODELS_DIR / f"{kind}.json")
            stages.run('write', write)
        return report


# Global service instance
experiment_service = ExperimentService()
