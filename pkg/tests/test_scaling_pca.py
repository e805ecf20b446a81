"""
Min-max scaling, Jacobi PCA and the fitted preprocessing pipeline.
"""
import numpy as np
import pytest

from t2dmed.config.pipeline_config import PreprocessConfig
from t2dmed.services.feature_service import feature_service
from t2dmed.services.preprocess_service import feature_schema, preprocess_service
from t2dmed.utils.errors import MissingFeatureError, ParameterError, ShapeError
from t2dmed.utils.linalg import jacobi_eigh


def pairwise(points):
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.sum(diff ** 2, axis=-1))


class TestMinMax:

    def test_fit(self):
        scaler = feature_service.min_max_fit(np.array([[0.0], [5.0], [10.0]]))
        assert (scaler.mins[0], scaler.maxs[0]) == (0.0, 10.0)

    def test_single_row(self):
        scaler = feature_service.min_max_fit(np.array([[3.0, -1.0]]))
        np.testing.assert_array_equal(scaler.mins, scaler.maxs)

    def test_endpoints(self):
        train = np.array([[0.0, 7.0], [5.0, 7.0], [10.0, 7.0]])
        scaled = feature_service.min_max_transform(train, feature_service.min_max_fit(train))
        np.testing.assert_array_equal(scaled[:, 0], [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(scaled[:, 1], [0.0, 0.0, 0.0])

    def test_no_clamping(self):
        scaler = feature_service.min_max_fit(np.array([[0.0], [10.0]]))
        np.testing.assert_array_equal(feature_service.min_max_transform(np.array([[20.0]]), scaler), [[2.0]])

    def test_feature_count_mismatch(self):
        scaler = feature_service.min_max_fit(np.ones((3, 2)))
        with pytest.raises(ShapeError):
            feature_service.min_max_transform(np.ones((3, 3)), scaler)


class TestJacobi:

    def test_matches_known_spectrum(self):
        matrix = np.array([[2.0, 1.0], [1.0, 2.0]])
        values, vectors = jacobi_eigh(matrix)
        np.testing.assert_allclose(values, [3.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(matrix @ vectors, vectors * values, atol=1e-12)

    def test_random_symmetric(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(6, 6))
        matrix = a + a.T
        values, vectors = jacobi_eigh(matrix)
        np.testing.assert_allclose(vectors @ np.diag(values) @ vectors.T, matrix, atol=1e-10)
        np.testing.assert_allclose(vectors.T @ vectors, np.eye(6), atol=1e-10)
        assert np.all(np.diff(values) <= 0)


class TestPca:

    def line_data(self):
        t = np.arange(5, dtype=float)
        return np.column_stack([t, t])

    def test_line_first_component(self):
        pca = feature_service.pca_fit(self.line_data(), k=1)
        np.testing.assert_allclose(pca.components[0], [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)
        assert pca.explained_variance_ratio()[0] == pytest.approx(1.0, abs=1e-12)

    def test_line_rank_one_reconstruction(self):
        data = self.line_data()
        pca = feature_service.pca_fit(data, k=1)
        scores = feature_service.pca_transform(data, pca)
        residual = data - (pca.mean_vector + scores @ pca.components)
        np.testing.assert_allclose(residual, 0.0, atol=1e-10)

    def test_orthonormal_components(self):
        data = np.random.default_rng(0).normal(size=(50, 5))
        pca = feature_service.pca_fit(data, k=3)
        np.testing.assert_allclose(pca.components @ pca.components.T, np.eye(3), atol=1e-8)

    def test_full_rank_is_isometry(self):
        data = np.random.default_rng(1).normal(size=(50, 5))
        pca = feature_service.pca_fit(data, k=5)
        projected = feature_service.pca_transform(data, pca)
        np.testing.assert_allclose(pairwise(projected), pairwise(data), atol=1e-8)

    def test_mean_row_maps_to_origin(self):
        data = np.random.default_rng(2).normal(size=(20, 4))
        pca = feature_service.pca_fit(data, k=2)
        np.testing.assert_allclose(feature_service.pca_transform(pca.mean_vector[None, :], pca), 0.0, atol=1e-12)

    def test_sign_convention(self):
        data = np.random.default_rng(3).normal(size=(30, 4))
        pca = feature_service.pca_fit(data, k=4)
        for row in pca.components:
            assert row[np.argmax(np.abs(row))] > 0

    @pytest.mark.parametrize('seed', range(20))
    def test_spectrum_properties(self, seed):
        rng = np.random.default_rng(seed)
        n, d = int(rng.integers(3, 60)), int(rng.integers(1, 9))
        data = rng.normal(size=(n, d)) * rng.uniform(0.1, 10.0, size=d)
        pca = feature_service.pca_fit(data, k=1)

        values = pca.eigenvalues
        assert len(values) == d
        assert np.all(values >= 0.0)
        assert np.all(np.diff(values) <= 1e-12)
        total = float(np.sum(np.var(data, axis=0, ddof=1)))
        assert float(np.sum(values)) == pytest.approx(total, rel=1e-9, abs=1e-12)

    def test_k_too_large(self):
        with pytest.raises(ParameterError):
            feature_service.pca_fit(np.ones((5, 2)), k=3)

    def test_shape_mismatch(self):
        pca = feature_service.pca_fit(np.random.default_rng(0).normal(size=(10, 3)), k=2)
        with pytest.raises(ShapeError):
            feature_service.pca_transform(np.ones((2, 4)), pca)


class TestPreprocessPipeline:

    def test_fit_on_cohort(self, small_cohort):
        state, prepared = preprocess_service.fit_transform(small_cohort)

        assert 'Fasting' in state.selected_features
        assert 'Kidney Diseases' in state.selected_features
        assert 'Name of patient' not in state.required_inputs()
        assert prepared.features.shape == (600, len(state.selected_features))
        assert prepared.features.min() >= 0.0 and prepared.features.max() <= 1.0
        assert len(prepared.labels) == 600

    def test_one_hot_override(self, small_cohort):
        config = PreprocessConfig(encoding_overrides={'Kidney Diseases': 'one_hot'})
        state = preprocess_service.fit(small_cohort, config)
        encoded = [c.name for c in state.encoded_features]
        assert 'Kidney Diseases=No' in encoded and 'Kidney Diseases=Yes' in encoded

    def test_missing_input_columns_listed(self, small_cohort):
        state = preprocess_service.fit(small_cohort)
        required = state.required_inputs()
        stripped = small_cohort
        for name in required[:2]:
            stripped = stripped.expand_column(name, [], [])
        with pytest.raises(MissingFeatureError) as excinfo:
            preprocess_service.transform(stripped, state)
        assert excinfo.value.missing == required[:2]

    def test_feature_schema_matches_required_inputs(self, small_cohort):
        state = preprocess_service.fit(small_cohort)
        assert [c.name for c in feature_schema(state)] == state.required_inputs()

    def test_state_round_trip(self, small_cohort):
        from t2dmed.models.preprocess_state import PreprocessState

        state, prepared = preprocess_service.fit_transform(small_cohort)
        restored = PreprocessState.from_dict(state.to_dict())
        replayed = preprocess_service.transform(small_cohort, restored)
        np.testing.assert_array_equal(replayed.features, prepared.features)

    def test_imputes_with_training_statistics(self, small_table):
        state = preprocess_service.fit(small_table, PreprocessConfig(p_threshold=1.0))
        assert state.impute_values['BMI'] == pytest.approx((22 + 31 + 24 + 35 + 28) / 5)
