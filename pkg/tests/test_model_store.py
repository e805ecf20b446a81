"""
Model file save / load.
"""
import json

import numpy as np
import pytest

from t2dmed.config.pipeline_config import ClassifierSpec, NetworkConfig
from t2dmed.services.model_service import model_service
from t2dmed.services.model_store import MODEL_FORMAT, MODEL_SCHEMA_VERSION, model_store
from t2dmed.utils.errors import FormatError, ModelFileError, VersionError

SPECS = {
    'logistic': ClassifierSpec(kind='logistic', hyperparameters={'epochs': 40}),
    'lda': ClassifierSpec(kind='lda'),
    'knn': ClassifierSpec(kind='knn', hyperparameters={'k': 3}),
    'naive_bayes': ClassifierSpec(kind='naive_bayes'),
    'decision_tree': ClassifierSpec(kind='decision_tree'),
    'random_forest': ClassifierSpec(kind='random_forest', hyperparameters={'n_trees': 3}),
    'svm': ClassifierSpec(kind='svm', hyperparameters={'epochs': 20}),
    'ann': NetworkConfig(hidden_layers=[6], epochs=3),
}


@pytest.fixture(scope='module')
def training_rows(small_cohort):
    return small_cohort.take(np.arange(200))


@pytest.fixture(scope='module')
def fitted(training_rows):
    return {kind: model_service.fit_table(spec, training_rows, seed=2) for kind, spec in SPECS.items()}


@pytest.mark.parametrize('kind', list(SPECS))
def test_round_trip_preserves_predictions(kind, fitted, training_rows, tmp_path):
    model = fitted[kind]
    path = model_store.save_model(model, tmp_path / f"{kind}.json")
    loaded = model_store.load_model(path)

    assert loaded.kind == kind
    assert loaded.class_labels == model.class_labels
    assert list(model_service.predict_table(loaded, training_rows)) == \
        list(model_service.predict_table(model, training_rows))
    assert model_store.dumps(loaded) == model_store.dumps(model)


class TestDocument:

    def test_header_fields(self, fitted):
        document = json.loads(model_store.dumps(fitted['lda']))
        assert document['format'] == MODEL_FORMAT
        assert document['schema_version'] == MODEL_SCHEMA_VERSION
        assert document['preprocess']['selected_features']

    def test_probabilities_survive(self, fitted, training_rows):
        from t2dmed.services.preprocess_service import preprocess_service

        model = fitted['naive_bayes']
        loaded = model_store.loads(model_store.dumps(model).encode('utf-8'))
        features = preprocess_service.transform(training_rows, model.preprocess, with_labels=False).features
        np.testing.assert_array_equal(model_service.predict_proba(loaded, features),
                                      model_service.predict_proba(model, features))

    def test_no_temp_file_left(self, fitted, tmp_path):
        model_store.save_model(fitted['knn'], tmp_path / 'm' / 'knn.json')
        assert [p.name for p in (tmp_path / 'm').iterdir()] == ['knn.json']


class TestCorruptFiles:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ModelFileError):
            model_store.load_model(tmp_path / 'absent.json')

    def test_truncated(self, fitted, tmp_path):
        raw = model_store.dumps(fitted['logistic']).encode('utf-8')
        path = tmp_path / 'cut.json'
        path.write_bytes(raw[:len(raw) // 2])
        with pytest.raises(FormatError) as excinfo:
            model_store.load_model(path)
        assert excinfo.value.offset > 0
        assert excinfo.value.exit_code == 3

    def test_invalid_utf8(self):
        with pytest.raises(FormatError) as excinfo:
            model_store.loads(b'{"format": "\xff"}')
        assert excinfo.value.offset == 12

    def test_not_a_model(self):
        with pytest.raises(FormatError):
            model_store.loads(b'{"hello": 1}')

    def test_future_version(self, fitted):
        document = json.loads(model_store.dumps(fitted['svm']))
        document['schema_version'] = 999
        with pytest.raises(VersionError):
            model_store.loads(json.dumps(document).encode('utf-8'))

    def test_malformed_params(self, fitted):
        document = json.loads(model_store.dumps(fitted['svm']))
        del document['params']['bias']
        with pytest.raises(FormatError):
            model_store.loads(json.dumps(document).encode('utf-8'))
