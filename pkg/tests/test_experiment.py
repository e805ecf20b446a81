"""
End-to-end experiment runs.
"""
import json

import numpy as np
import pytest

from t2dmed.config.pipeline_config import (
    ClassifierSpec, DataSourceConfig, GeneratorSettings, PipelineConfig, PreprocessConfig, default_network,
)
from t2dmed.models.table import Column
from t2dmed.services.cohort_generator import cohort_generator
from t2dmed.services.experiment_service import MODELS_DIR, experiment_service
from t2dmed.services.figure_service import BAR_CHART_FILE, SCATTER_FILE
from t2dmed.services.model_store import model_store
from t2dmed.services.neural_service import neural_service
from t2dmed.services.preprocess_service import preprocess_service
from t2dmed.services.report_writer import PARTIAL_REPORT_JSON, PCA_POINTS_JSON, REPORT_CSV, REPORT_JSON
from t2dmed.services.tabular_service import tabular_service
from t2dmed.utils.errors import FoldError, StageError
from t2dmed.utils.rng import XorShift64Star

ALL_KINDS = ['logistic', 'lda', 'knn', 'naive_bayes', 'decision_tree', 'random_forest', 'svm', 'ann']


def write_cohort(table, directory):
    csv_path, schema_path = directory / 'cohort.csv', directory / 'schema.json'
    directory.mkdir(parents=True, exist_ok=True)
    tabular_service.write_csv(table, csv_path)
    tabular_service.save_schema(table.schema, schema_path)
    return DataSourceConfig(csv_path=str(csv_path), schema_path=str(schema_path))


class TestRunExperiment:

    def test_report_covers_roster(self, fast_config):
        report = experiment_service.run_experiment(fast_config)

        assert [m.kind for m in report.models] == ALL_KINDS
        for entry in report.models:
            assert 0.0 <= entry.accuracy <= 1.0
            assert len(entry.fold_accuracies) == 3
        assert report.metadata['n_rows'] == 400
        assert (report.metadata['n_train'], report.metadata['n_test']) == (320, 80)
        assert report.metadata['rng'] == XorShift64Star.VERSION
        assert report.metadata['cv'] == {'k': 3, 'scope': 'training split'}
        assert report.metadata['timestamp'] == '1970-01-01T00:00:00Z'
        assert len(report.metadata['pca_explained_variance_ratio']) == 2

    def test_output_files(self, fast_config, tmp_path):
        out = tmp_path / 'run'
        experiment_service.run_experiment(fast_config.model_copy(update={'run_cv': False}), out)

        for name in (REPORT_JSON, REPORT_CSV, PCA_POINTS_JSON, BAR_CHART_FILE, SCATTER_FILE):
            assert (out / name).exists(), name
        assert sorted(p.stem for p in (out / MODELS_DIR).glob('*.json')) == sorted(ALL_KINDS)
        document = json.loads((out / REPORT_JSON).read_text(encoding='utf-8'))
        assert document['metadata']['cv']['k'] is None

    def test_saved_models_reload(self, fast_config, tmp_path):
        config = fast_config.model_copy(update={'run_cv': False})
        report = experiment_service.run_experiment(config, tmp_path)
        model = model_store.load_model(tmp_path / MODELS_DIR / 'decision_tree.json')
        assert model.metadata['config_digest'] == report.metadata['config_digest']
        assert model.preprocess.selected_features == report.metadata['selected_features']

    def test_byte_identical_reruns(self, fast_config, tmp_path):
        config = fast_config.model_copy(update={'run_cv': False})
        experiment_service.run_experiment(config, tmp_path / 'a')
        experiment_service.run_experiment(config, tmp_path / 'b')
        names = [REPORT_JSON, REPORT_CSV, PCA_POINTS_JSON, BAR_CHART_FILE, SCATTER_FILE] + \
            [f"{MODELS_DIR}/{kind}.json" for kind in ALL_KINDS]
        for name in names:
            assert (tmp_path / 'a' / name).read_bytes() == (tmp_path / 'b' / name).read_bytes(), name

    def test_master_seed_changes_split(self, fast_config):
        table = experiment_service.load_data(fast_config)
        _, test_a = experiment_service.split(fast_config, table)
        _, test_b = experiment_service.split(fast_config.model_copy(update={'master_seed': 2}), table)
        assert not np.array_equal(test_a.row_ids, test_b.row_ids)

    def test_generator_seed_wins_over_master_seed(self, fast_config):
        a = experiment_service.load_data(fast_config)
        b = experiment_service.load_data(fast_config.model_copy(update={'master_seed': 99}))
        np.testing.assert_array_equal(a.column('Fasting').values, b.column('Fasting').values)

    def test_network_disabled(self, fast_config):
        config = fast_config.model_copy(update={'network': None, 'run_cv': False})
        report = experiment_service.run_experiment(config)
        assert 'ann' not in [m.kind for m in report.models]


class TestFailures:

    def test_missing_csv_names_load_stage(self, fast_config, small_cohort, tmp_path):
        source = write_cohort(small_cohort, tmp_path / 'data')
        (tmp_path / 'data' / 'cohort.csv').unlink()
        config = fast_config.model_copy(update={'data': source})

        with pytest.raises(StageError) as excinfo:
            experiment_service.run_experiment(config, tmp_path / 'out')
        assert excinfo.value.stage == 'load'
        assert excinfo.value.exit_code == 3

        partial = json.loads((tmp_path / 'out' / PARTIAL_REPORT_JSON).read_text(encoding='utf-8'))
        assert partial['failed_stage'] == 'load'
        assert partial['completed_stages'] == []
        assert not (tmp_path / 'out' / REPORT_JSON).exists()

    def knn_only(self, fast_config, k):
        return fast_config.model_copy(update={
            'data': DataSourceConfig(generator=GeneratorSettings(n_rows=400, noise_rate=0.0, seed=5)),
            'classifiers': [ClassifierSpec(kind='knn', hyperparameters={'k': k})],
            'network': None,
            'cv_k': 6,
        })

    def test_train_failure(self, fast_config, tmp_path):
        # 400 rows leave 320 for training
        with pytest.raises(StageError) as excinfo:
            experiment_service.run_experiment(self.knn_only(fast_config, 321), tmp_path)
        assert excinfo.value.stage == 'train'
        assert excinfo.value.exit_code == 2
        partial = json.loads((tmp_path / PARTIAL_REPORT_JSON).read_text(encoding='utf-8'))
        assert partial['completed_stages'] == ['load', 'split', 'preprocess']

    def test_fold_failure_names_cross_validate_stage(self, fast_config, tmp_path):
        # every fold trains on about 267 of the 320 rows, fewer than k
        with pytest.raises(StageError) as excinfo:
            experiment_service.run_experiment(self.knn_only(fast_config, 300), tmp_path)
        assert excinfo.value.stage == 'cross_validate'
        assert isinstance(excinfo.value.cause, FoldError)
        partial = json.loads((tmp_path / PARTIAL_REPORT_JSON).read_text(encoding='utf-8'))
        assert partial['completed_stages'] == ['load', 'split', 'preprocess', 'train', 'evaluate']


class TestLeakage:

    def test_test_rows_never_reach_training(self, fast_config, tmp_path):
        table = experiment_service.load_data(fast_config)
        _, test = experiment_service.split(fast_config, table)
        fasting = np.array(table.column('Fasting').values, copy=True)
        fasting[test.row_ids] = 1e9
        poisoned = table.replace_column('Fasting', Column.numeric(fasting))

        clean_source = write_cohort(table, tmp_path / 'clean')
        poisoned_source = write_cohort(poisoned, tmp_path / 'poisoned')
        base = fast_config.model_copy(update={'run_cv': False})
        experiment_service.run_experiment(base.model_copy(update={'data': clean_source}), tmp_path / 'a')
        experiment_service.run_experiment(base.model_copy(update={'data': poisoned_source}), tmp_path / 'b')

        for kind in ALL_KINDS:
            a = json.loads((tmp_path / 'a' / MODELS_DIR / f"{kind}.json").read_text(encoding='utf-8'))
            b = json.loads((tmp_path / 'b' / MODELS_DIR / f"{kind}.json").read_text(encoding='utf-8'))
            assert a['params'] == b['params'], kind
            assert a['preprocess'] == b['preprocess'], kind


class TestTrainModel:

    def test_matches_experiment_model(self, fast_config, tmp_path):
        config = fast_config.model_copy(update={'run_cv': False})
        experiment_service.run_experiment(config, tmp_path)
        trained = experiment_service.train_model(config, 'naive_bayes')
        assert model_store.dumps(trained) == (tmp_path / MODELS_DIR / 'naive_bayes.json').read_text(encoding='utf-8')

    def test_unknown_kind(self, fast_config):
        from t2dmed.utils.errors import ConfigError

        with pytest.raises(ConfigError):
            experiment_service.train_model(fast_config.model_copy(update={'network': None}), 'ann')


class TestDefaultCohort:
    """Full-size runs of the shipped configuration."""

    @pytest.mark.slow
    @pytest.mark.parametrize('master_seed', [0, 1, 2])
    def test_accuracy_bounds(self, master_seed):
        config = PipelineConfig(run_cv=False, master_seed=master_seed)
        report = experiment_service.run_experiment(config)
        for kind in ('decision_tree', 'random_forest', 'ann'):
            assert report.model(kind).accuracy >= 0.90, kind
        assert max(m.accuracy for m in report.models) <= 0.98

    @pytest.mark.slow
    def test_network_loss_trend(self):
        cohort = cohort_generator.generate_cohort(GeneratorSettings(n_rows=2000, noise_rate=0.05, seed=21))
        _, prepared = preprocess_service.fit_transform(cohort, PreprocessConfig())
        steady = 0
        for seed in range(20):
            model = neural_service.fit(default_network(), prepared.features, prepared.labels, seed=seed)
            history = np.asarray(model.metadata['loss_history'][5:])
            window_means = history.reshape(-1, 5).mean(axis=1)
            # windows may rise by at most 0.1% over the one before
            if np.all(window_means[1:] <= window_means[:-1] * 1.001):
                steady += 1
        assert steady >= 18
