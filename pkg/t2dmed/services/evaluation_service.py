"""
Stratified k-fold planning, cross-validation and classification metrics.
"""
import logging
from typing import List, Optional, Sequence, Union

import numpy as np

from t2dmed.config.pipeline_config import PreprocessConfig
from t2dmed.models.report import FoldPlan, MetricsBundle
from t2dmed.models.table import Table
from t2dmed.services.model_service import ModelSpec, model_service
from t2dmed.services.preprocess_service import preprocess_service
from t2dmed.utils.errors import FoldError, LabelError, ParameterError, ShapeError, T2DMedError
from t2dmed.utils.rng import XorShift64Star

logger = logging.getLogger(__name__)

DEFAULT_FOLDS = 10


class EvaluationService:
    """Fold planning, cross-validation and the metric suite."""

    def stratified_k_fold(self, labels: Sequence[str], k: int = DEFAULT_FOLDS, seed: int = 0) -> FoldPlan:
        """
        Assign every row to one of k folds, preserving class proportions.

        Rows of each class (classes in order of first appearance) are shuffled
        with the seeded PRNG and dealt round-robin; the deal position carries
        over between classes, so overall fold sizes also differ by at most one.

        Raises:
            ParameterError: k < 2 or k > number of rows
        """
        labels = [str(label) for label in labels]
        n = len(labels)
        if k < 2:
            raise ParameterError(f"k must be >= 2, got {k}")
        if k > n:
            raise ParameterError(f"k={k} exceeds the number of rows ({n})")

        rng = XorShift64Star(seed)
        by_class = {}
        for index, label in enumerate(labels):
            by_class.setdefault(label, []).append(index)

        assignments = np.zeros(n, dtype=np.int64)
        warnings = []
        position = 0
        for label, rows in by_class.items():
            if len(rows) < k:
                message = f"Class '{label}' has {len(rows)} samples, fewer than k={k}"
                logger.warning(message)
                warnings.append(message)
            rng.shuffle(rows)
            for row in rows:
                assignments[row] = position % k
                position += 1
        return FoldPlan(k=k, assignments=assignments, warnings=warnings)

    def cross_validate(self, spec: ModelSpec, data: Union[Table, np.ndarray],
                       plan: FoldPlan, labels: Optional[Sequence[str]] = None,
                       preprocess: Optional[PreprocessConfig] = None, seed: Optional[int] = None) -> List[float]:
        """
        Per-fold held-out accuracy.

        With a Table, preprocessing is refitted on each fold's training rows
        only. With a matrix, ``labels`` are required and the features are used
        as given.

        Raises:
            FoldError: training or prediction failed, carrying the fold index
        """
        n_rows = data.n_rows if isinstance(data, Table) else np.asarray(data).shape[0]
        if plan.n_rows != n_rows:
            raise ShapeError(f"Fold plan covers {plan.n_rows} rows, data has {n_rows}")
        if not isinstance(data, Table):
            if labels is None or len(labels) != n_rows:
                raise ShapeError("Matrix cross-validation needs one label per row")
            matrix = np.asarray(data, dtype=np.float64)
            labels = [str(label) for label in labels]

        accuracies = []
        for fold in range(plan.k):
            train_rows, test_rows = plan.split(fold)
            try:
                if isinstance(data, Table):
                    model = model_service.fit_table(spec, data.take(train_rows), preprocess, seed)
                    test_table = data.take(test_rows)
                    predicted = model_service.predict_table(model, test_table)
                    actual = preprocess_service.transform(test_table, model.preprocess).labels
                else:
                    model = model_service.fit(spec, matrix[train_rows], [labels[i] for i in train_rows], seed)
                    predicted = model_service.predict(model, matrix[test_rows])
                    actual = [labels[i] for i in test_rows]
            except T2DMedError as e:
                raise FoldError(fold, e) from e
            accuracy = self.accuracy(predicted, actual)
            logger.info(f"{spec.kind} fold {fold + 1}/{plan.k}: accuracy {accuracy:.4f}")
            accuracies.append(accuracy)
        return accuracies

    def accuracy(self, predicted: Sequence, actual: Sequence) -> float:
        if len(predicted) != len(actual) or len(actual) == 0:
            raise ShapeError(f"Cannot score {len(predicted)} predictions against {len(actual)} labels")
        hits = sum(1 for p, a in zip(predicted, actual) if str(p) == str(a))
        return hits / len(actual)

    def compute_metrics(self, predicted: Sequence, actual: Sequence,
                        class_labels: Sequence[str]) -> MetricsBundle:
        """
        Confusion matrix (actual x predicted), accuracy and per-class precision.

        A class never predicted gets precision 0 and is listed in
        degenerate_classes. Macro precision averages over classes present in
        ``actual``.
        """
        if len(predicted) != len(actual) or len(actual) == 0:
            raise ShapeError(f"Cannot score {len(predicted)} predictions against {len(actual)} labels")
        class_labels = [str(c) for c in class_labels]
        index = {c: i for i, c in enumerate(class_labels)}
        n_classes = len(class_labels)
        confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
        for p, a in zip(predicted, actual):
            p, a = str(p), str(a)
            if p not in index:
                raise LabelError(f"Predicted label '{p}' is not a known class")
            if a not in index:
                raise LabelError(f"Actual label '{a}' is not a known class")
            confusion[index[a], index[p]] += 1

        column_sums = confusion.sum(axis=0)
        precision = []
        degenerate = []
        for j in range(n_classes):
            if column_sums[j] == 0:
                precision.append(0.0)
                degenerate.append(class_labels[j])
            else:
                precision.append(int(confusion[j, j]) / int(column_sums[j]))
        if degenerate:
            logger.warning(f"Precision undefined (no predictions) for: {', '.join(degenerate)}")

        present = confusion.sum(axis=1) > 0
        macro = float(np.mean([precision[j] for j in range(n_classes) if present[j]]))
        accuracy = int(np.trace(confusion)) / int(confusion.sum())
        return MetricsBundle(class_labels=class_labels, confusion=confusion, accuracy=accuracy,
                             precision=precision, macro_precision=macro, degenerate_classes=degenerate)


# Global service instance
evaluation_service = EvaluationService()
