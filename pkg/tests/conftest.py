"""
Shared fixtures: small tables, seeded matrices, a small cohort and a fast pipeline config.
"""
import os

import numpy as np
import pytest

os.environ.setdefault('T2DMED_ENVIRONMENT', 'testing')

from t2dmed.config.pipeline_config import (  # noqa: E402
    ClassifierSpec, DataSourceConfig, GeneratorSettings, NetworkConfig, PipelineConfig,
)
from t2dmed.models.table import Column, ColumnSchema, Table  # noqa: E402
from t2dmed.services.cohort_generator import cohort_generator  # noqa: E402


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False, help='run slow acceptance tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip_slow = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_table():
    """Six patients, one missing BMI, two categorical features."""
    schema = [
        ColumnSchema('Name of patient', 'categorical', 'identifier'),
        ColumnSchema('Fasting', 'numeric'),
        ColumnSchema('BMI', 'numeric'),
        ColumnSchema('Sex', 'categorical'),
        ColumnSchema('Kidney Diseases', 'categorical'),
        ColumnSchema('Medications', 'categorical', 'target'),
    ]
    columns = {
        'Name of patient': Column.categorical([f"P{i}" for i in range(6)]),
        'Fasting': Column.numeric([100.0, 210.0, 150.0, 95.0, 230.0, 140.0]),
        'BMI': Column.numeric([22.0, np.nan, 31.0, 24.0, 35.0, 28.0]),
        'Sex': Column.categorical(['Male', 'Female', 'Female', 'Male', 'Male', 'Female']),
        'Kidney Diseases': Column.categorical(['No', 'Yes', 'No', 'No', 'No', 'No']),
        'Medications': Column.categorical(['Diet', 'Insulin', 'Biguanides', 'Diet', 'Insulin', 'Biguanides']),
    }
    return Table(schema, columns)


@pytest.fixture
def blobs():
    """Two well separated 2-D Gaussian blobs, 40 rows each."""
    rng = np.random.default_rng(7)
    a = rng.normal(loc=(-2.0, -2.0), scale=0.4, size=(40, 2))
    b = rng.normal(loc=(2.0, 2.0), scale=0.4, size=(40, 2))
    features = np.vstack([a, b])
    labels = ['A'] * 40 + ['B'] * 40
    return features, labels


@pytest.fixture
def four_class_matrix():
    """Seeded 4-class data with class-dependent means in 5 dimensions."""
    rng = np.random.default_rng(11)
    centers = rng.uniform(-3, 3, size=(4, 5))
    codes = np.repeat(np.arange(4), 30)
    features = centers[codes] + rng.normal(scale=0.7, size=(120, 5))
    labels = [f"class{c}" for c in codes]
    return features, labels


@pytest.fixture(scope='session')
def small_cohort():
    return cohort_generator.generate_cohort(GeneratorSettings(n_rows=600, noise_rate=0.0, seed=3))


@pytest.fixture
def fast_config(tmp_path):
    """Every model kind, small cohort, cheap hyperparameters."""
    return PipelineConfig(
        data=DataSourceConfig(generator=GeneratorSettings(n_rows=400, noise_rate=0.05, seed=5)),
        cv_k=3,
        classifiers=[
            ClassifierSpec(kind='logistic', hyperparameters={'epochs': 50}),
            ClassifierSpec(kind='lda'),
            ClassifierSpec(kind='knn'),
            ClassifierSpec(kind='naive_bayes'),
            ClassifierSpec(kind='decision_tree'),
            ClassifierSpec(kind='random_forest', hyperparameters={'n_trees': 3}),
            ClassifierSpec(kind='svm', hyperparameters={'epochs': 30}),
        ],
        network=NetworkConfig(hidden_layers=[8, 8], epochs=5),
        master_seed=1,
    )
