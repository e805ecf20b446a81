"""
Stratified folds, cross-validation and the metric suite.
"""
import numpy as np
import pytest

from t2dmed.config.pipeline_config import ClassifierSpec
from t2dmed.models.report import EvaluationReport, ModelMetrics
from t2dmed.models.table import Column
from t2dmed.services.evaluation_service import evaluation_service
from t2dmed.services.model_service import model_service
from t2dmed.utils.errors import FoldError, LabelError, ParameterError, ShapeError


def confusion_fixture():
    """20 samples over 4 classes with a hand-enumerated confusion matrix."""
    confusion = [[4, 1, 0, 0],
                 [0, 3, 2, 0],
                 [1, 0, 4, 0],
                 [0, 1, 0, 4]]
    classes = ['a', 'b', 'c', 'd']
    actual, predicted = [], []
    for i, row in enumerate(confusion):
        for j, count in enumerate(row):
            actual += [classes[i]] * count
            predicted += [classes[j]] * count
    return predicted, actual, classes


class TestStratifiedKFold:

    def test_exact_stratification(self):
        labels = ['A'] * 60 + ['B'] * 40
        plan = evaluation_service.stratified_k_fold(labels, k=10, seed=1)
        for fold in range(10):
            _, test = plan.split(fold)
            fold_labels = [labels[i] for i in test]
            assert fold_labels.count('A') == 6
            assert fold_labels.count('B') == 4

    def test_default_k(self):
        assert evaluation_service.stratified_k_fold(['A', 'B'] * 10).k == 10

    @pytest.mark.parametrize('seed', range(50))
    def test_balance_over_seeds(self, seed):
        rng = np.random.default_rng(seed)
        labels = [f"c{c}" for c in rng.integers(0, 4, size=int(rng.integers(40, 120)))]
        plan = evaluation_service.stratified_k_fold(labels, k=5, seed=seed)

        sizes = plan.fold_sizes()
        assert max(sizes) - min(sizes) <= 1
        for cls in set(labels):
            per_fold = [sum(1 for i in plan.split(f)[1] if labels[i] == cls) for f in range(5)]
            assert max(per_fold) - min(per_fold) <= 1

    def test_partition(self):
        plan = evaluation_service.stratified_k_fold(['x', 'y', 'z'] * 7, k=4, seed=2)
        tested = np.sort(np.concatenate([plan.split(f)[1] for f in range(4)]))
        assert tested.tolist() == list(range(21))

    def test_deterministic(self):
        labels = ['A', 'B', 'B', 'C'] * 15
        a = evaluation_service.stratified_k_fold(labels, k=6, seed=3)
        b = evaluation_service.stratified_k_fold(labels, k=6, seed=3)
        np.testing.assert_array_equal(a.assignments, b.assignments)

    def test_small_class_warns(self):
        plan = evaluation_service.stratified_k_fold(['A'] * 20 + ['B'] * 3, k=5, seed=0)
        assert len(plan.warnings) == 1
        assert "'B'" in plan.warnings[0]

    @pytest.mark.parametrize('k', [1, 11])
    def test_invalid_k(self, k):
        with pytest.raises(ParameterError):
            evaluation_service.stratified_k_fold(['A', 'B'] * 5, k=k)


class TestCrossValidate:

    def test_constant_predictor_on_balanced_data(self):
        labels = ['pos', 'neg'] * 50
        plan = evaluation_service.stratified_k_fold(labels, k=10, seed=4)
        accuracies = evaluation_service.cross_validate(ClassifierSpec(kind='decision_tree'),
                                                       np.ones((100, 1)), plan, labels=labels)
        assert accuracies == [0.5] * 10

    def test_one_nn_matches_oracle(self):
        rng = np.random.default_rng(21)
        features = rng.normal(size=(100, 3))
        labels = ['A' if f[0] + 0.5 * rng.normal() > 0 else 'B' for f in features]
        plan = evaluation_service.stratified_k_fold(labels, k=10, seed=5)
        accuracies = evaluation_service.cross_validate(
            ClassifierSpec(kind='knn', hyperparameters={'k': 1}), features, plan, labels=labels)

        for fold in range(10):
            train, test = plan.split(fold)
            hits = 0
            for i in test:
                nearest = min(train, key=lambda j: float(np.sum((features[j] - features[i]) ** 2)))
                hits += labels[nearest] == labels[i]
            assert accuracies[fold] == hits / len(test)

    def test_report_mean_matches(self):
        labels = ['pos', 'neg'] * 20
        features = np.arange(40, dtype=float)[:, None]
        plan = evaluation_service.stratified_k_fold(labels, k=4, seed=0)
        accuracies = evaluation_service.cross_validate(ClassifierSpec(kind='naive_bayes'), features, plan, labels)
        metrics = ModelMetrics('naive_bayes', evaluation_service.compute_metrics(['pos'], ['pos'], ['pos', 'neg']),
                               1.0, accuracies)
        assert metrics.cv_mean == pytest.approx(sum(accuracies) / 4, abs=1e-12)

    def test_fold_error_carries_index(self):
        labels = ['A'] * 10 + ['B'] * 2
        plan = evaluation_service.stratified_k_fold(labels, k=2, seed=0)
        with pytest.raises(FoldError) as excinfo:
            evaluation_service.cross_validate(ClassifierSpec(kind='lda'), np.arange(12.0)[:, None], plan, labels)
        assert excinfo.value.fold == 0

    def test_plan_length_mismatch(self):
        plan = evaluation_service.stratified_k_fold(['A', 'B'] * 5, k=2)
        with pytest.raises(ShapeError):
            evaluation_service.cross_validate(ClassifierSpec(kind='knn'), np.zeros((8, 1)), plan, ['A', 'B'] * 4)

    def test_preprocessing_is_refit_without_test_rows(self, small_cohort, monkeypatch):
        table = small_cohort.take(np.arange(300))
        plan = evaluation_service.stratified_k_fold(table.labels(), k=3, seed=6)
        _, poisoned_rows = plan.split(0)
        fasting = np.array(table.column('Fasting').values)
        fasting[poisoned_rows] = 1e6
        poisoned = table.replace_column('Fasting', Column.numeric(fasting))

        fitted = []
        original = model_service.fit_table

        def spy(spec, fold_table, preprocess=None, seed=None):
            model = original(spec, fold_table, preprocess, seed)
            fitted.append((set(fold_table.row_ids.tolist()), model))
            return model

        monkeypatch.setattr(model_service, 'fit_table', spy)
        evaluation_service.cross_validate(ClassifierSpec(kind='naive_bayes'), poisoned, plan)

        train_ids, first = fitted[0]
        assert train_ids.isdisjoint(poisoned.row_ids[poisoned_rows].tolist())
        column = first.preprocess.selected_features.index('Fasting')
        assert first.preprocess.scaler.maxs[column] <= 250.0
        assert first.preprocess.impute_values['Fasting'] <= 250.0


class TestMetrics:

    def test_perfect(self):
        metrics = evaluation_service.compute_metrics(['a', 'b', 'c'], ['a', 'b', 'c'], ['a', 'b', 'c'])
        assert metrics.accuracy == 1.0
        assert metrics.precision == [1.0, 1.0, 1.0]
        assert metrics.degenerate_classes == []

    def test_all_positive(self):
        metrics = evaluation_service.compute_metrics(['pos'] * 4, ['pos', 'neg', 'pos', 'neg'], ['pos', 'neg'])
        assert metrics.accuracy == 0.5
        assert metrics.precision == [0.5, 0.0]
        assert metrics.degenerate_classes == ['neg']
        assert metrics.macro_precision == 0.25

    def test_hand_computed_four_classes(self):
        predicted, actual, classes = confusion_fixture()
        metrics = evaluation_service.compute_metrics(predicted, actual, classes)

        assert metrics.confusion.tolist() == [[4, 1, 0, 0], [0, 3, 2, 0], [1, 0, 4, 0], [0, 1, 0, 4]]
        assert metrics.n_samples == 20
        assert metrics.accuracy == pytest.approx(0.75, abs=1e-12)
        np.testing.assert_allclose(metrics.precision, [0.8, 0.6, 4 / 6, 1.0], atol=1e-12)
        assert metrics.macro_precision == pytest.approx((0.8 + 0.6 + 4 / 6 + 1.0) / 4, abs=1e-12)

    def test_macro_ignores_classes_absent_from_actual(self):
        metrics = evaluation_service.compute_metrics(['a', 'b'], ['a', 'a'], ['a', 'b', 'c'])
        assert metrics.macro_precision == 1.0

    def test_permutation_invariance(self):
        predicted, actual, classes = confusion_fixture()
        order = np.random.default_rng(0).permutation(20)
        shuffled = evaluation_service.compute_metrics([predicted[i] for i in order],
                                                      [actual[i] for i in order], classes)
        assert shuffled.to_dict() == evaluation_service.compute_metrics(predicted, actual, classes).to_dict()

    def test_unknown_label(self):
        with pytest.raises(LabelError):
            evaluation_service.compute_metrics(['a', 'z'], ['a', 'a'], ['a', 'b'])

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            evaluation_service.compute_metrics(['a'], ['a', 'b'], ['a', 'b'])


class TestEvaluationReport:

    def report(self):
        predicted, actual, classes = confusion_fixture()
        bundle = evaluation_service.compute_metrics(predicted, actual, classes)
        weaker = evaluation_service.compute_metrics(['a'] * 20, actual, classes)
        return EvaluationReport(classes, [
            ModelMetrics('knn', weaker, 0.3, [0.2, 0.3]),
            ModelMetrics('lda', bundle, 0.9, [0.7, 0.8, 0.75]),
        ], {'master_seed': 0})

    def test_best_and_ranking(self):
        report = self.report()
        assert report.best().kind == 'lda'
        assert [m.kind for m in report.ranking()] == ['lda', 'knn']

    def test_dict_round_trip(self):
        report = self.report()
        restored = EvaluationReport.from_dict(report.to_dict())
        assert restored.to_dict() == report.to_dict()

    def test_csv_rows(self):
        lines = self.report().to_csv().strip().split('\n')
        assert lines[0] == 'model,scope,fold,accuracy,macro_precision'
        assert sum(1 for line in lines if ',cv_fold,' in line) == 5
        assert 'lda,holdout,,0.75,' in self.report().to_csv()

    def test_confusion_trace_matches_accuracy(self):
        for entry in self.report().models:
            confusion = entry.holdout.confusion
            assert entry.accuracy == pytest.approx(np.trace(confusion) / confusion.sum(), abs=1e-12)
