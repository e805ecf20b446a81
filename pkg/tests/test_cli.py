"""
Command-line entry point: exit codes and written files.
"""
import json

import pytest

from t2dmed.cli import main
from t2dmed.services.figure_service import BAR_CHART_FILE
from t2dmed.services.report_writer import REPORT_CSV, REPORT_JSON


@pytest.fixture
def config_path(fast_config, tmp_path):
    path = tmp_path / 'config.json'
    config = fast_config.model_copy(update={'run_cv': False})
    path.write_text(json.dumps(config.model_dump(mode='json')), encoding='utf-8')
    return path


def test_no_command_prints_help(capsys):
    assert main([]) == 1
    assert 'usage' in capsys.readouterr().out


class TestGenerate:

    def test_writes_csv_and_schema(self, tmp_path):
        out, schema = tmp_path / 'cohort.csv', tmp_path / 'schema.json'
        assert main(['generate', '--rows', '25', '--seed', '3', '--out', str(out), '--schema-out', str(schema)]) == 0
        lines = out.read_text(encoding='utf-8').strip().split('\n')
        assert len(lines) == 26
        assert len(json.loads(schema.read_text(encoding='utf-8'))) == 14

    def test_invalid_settings(self, tmp_path):
        assert main(['generate', '--rows', '0', '--out', str(tmp_path / 'c.csv')]) == 2
        assert main(['generate', '--noise', '1.5', '--out', str(tmp_path / 'c.csv')]) == 2


class TestConfigCommands:

    def test_init_to_stdout(self, capsys):
        assert main(['config', 'init']) == 0
        document = json.loads(capsys.readouterr().out)
        assert document['cv_k'] == 10

    def test_init_refuses_overwrite(self, tmp_path):
        path = tmp_path / 'config.json'
        assert main(['config', 'init', '--out', str(path)]) == 0
        assert main(['config', 'init', '--out', str(path)]) == 1
        assert main(['config', 'init', '--out', str(path), '--force']) == 0

    def test_validate(self, config_path, tmp_path):
        assert main(['config', 'validate', '--config', str(config_path)]) == 0
        bad = tmp_path / 'bad.json'
        bad.write_text('{"master_seed": "zero"}', encoding='utf-8')
        assert main(['config', 'validate', '--config', str(bad)]) == 2

    @pytest.mark.parametrize('document', [
        {'classifiers': [{'kind': 'knn', 'hyperparameters': {'k': 'abc'}}]},
        {'data': {'generator': {'n_rows': 4}}, 'test_fraction': 0.1},
    ])
    def test_run_rejects_invalid_settings(self, document, tmp_path):
        path = tmp_path / 'config.json'
        path.write_text(json.dumps(document), encoding='utf-8')
        assert main(['run', '--config', str(path), '--out', str(tmp_path / 'out')]) == 2

    def test_check(self, config_path, tmp_path):
        assert main(['check', '--config', str(config_path), '--out', str(tmp_path / 'out')]) == 0


class TestRunAndReport:

    def test_run_then_report(self, config_path, tmp_path, capsys):
        out = tmp_path / 'results'
        assert main(['run', '--config', str(config_path), '--out', str(out)]) == 0
        assert 'Best model' in capsys.readouterr().out
        assert (out / REPORT_JSON).exists()

        (out / REPORT_CSV).unlink()
        (out / BAR_CHART_FILE).unlink()
        assert main(['report', '--in', str(out)]) == 0
        assert (out / REPORT_CSV).exists() and (out / BAR_CHART_FILE).exists()

    def test_report_without_run(self, tmp_path):
        assert main(['report', '--in', str(tmp_path)]) == 3

    def test_bad_config_file(self, tmp_path):
        assert main(['run', '--config', str(tmp_path / 'absent.json'), '--out', str(tmp_path)]) == 2


class TestTrainAndPredict:

    def test_train_then_predict(self, config_path, tmp_path, capsys):
        model = tmp_path / 'knn.json'
        assert main(['train', '--config', str(config_path), '--model', 'knn', '--out', str(model)]) == 0
        row = tmp_path / 'row.csv'
        assert main(['generate', '--rows', '1', '--seed', '8', '--out', str(row)]) == 0
        capsys.readouterr()

        assert main(['predict', '--model', str(model), '--row', str(row)]) == 0
        result = json.loads(capsys.readouterr().out)
        assert result['kind'] == 'knn'
        assert result['medication'] in result['probabilities']

    def test_predict_missing_feature(self, config_path, tmp_path):
        model = tmp_path / 'lda.json'
        assert main(['train', '--config', str(config_path), '--model', 'lda', '--out', str(model)]) == 0
        assert main(['predict', '--model', str(model), '--set', 'Age=50']) == 3

    def test_predict_missing_model(self, tmp_path):
        assert main(['predict', '--model', str(tmp_path / 'absent.json'), '--set', 'Age=50']) == 3

    def test_predict_corrupt_model(self, tmp_path):
        model = tmp_path / 'model.json'
        model.write_text('{"format": "t2dmed-model", "schema_version": 7}', encoding='utf-8')
        assert main(['predict', '--model', str(model), '--set', 'Age=50']) == 3
