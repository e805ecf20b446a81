"""
Evaluation records: fold plans, per-model metrics and the experiment report.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

REPORT_SCHEMA_VERSION = 1
REPORT_CSV_COLUMNS = ['model', 'scope', 'fold', 'accuracy', 'macro_precision']


@dataclass(frozen=True, eq=False)
class FoldPlan:
    """Fold index per row; fold i is the test set of round i."""
    k: int
    assignments: np.ndarray
    warnings: List[str] = field(default_factory=list)

    @property
    def n_rows(self) -> int:
        return len(self.assignments)

    def fold_sizes(self) -> List[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()

    def split(self, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        """(train row indices, test row indices) for one fold."""
        test = self.assignments == fold
        return np.flatnonzero(~test), np.flatnonzero(test)


@dataclass
class MetricsBundle:
    """Accuracy, precision and confusion matrix over one evaluated sample."""
    class_labels: List[str]
    confusion: np.ndarray  # actual x predicted
    accuracy: float
    precision: List[float]
    macro_precision: float
    degenerate_classes: List[str] = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> Dict[str, Any]:
        return {
            'accuracy': self.accuracy,
            'precision': list(self.precision),
            'macro_precision': self.macro_precision,
            'confusion': self.confusion.astype(int).tolist(),
            'degenerate_classes': list(self.degenerate_classes),
        }


@dataclass
class ModelMetrics:
    """Holdout, training and cross-validation results for one model."""
    kind: str
    holdout: MetricsBundle
    train_accuracy: float
    fold_accuracies: List[float] = field(default_factory=list)

    @property
    def cv_mean(self) -> Optional[float]:
        if not self.fold_accuracies:
            return None
        return float(np.mean(self.fold_accuracies))

    @property
    def cv_std(self) -> Optional[float]:
        if len(self.fold_accuracies) < 2:
            return None
        return float(np.std(self.fold_accuracies, ddof=1))

    @property
    def accuracy(self) -> float:
        return self.holdout.accuracy

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'holdout': self.holdout.to_dict(),
            'train_accuracy': self.train_accuracy,
            'cv': {
                'fold_accuracies': list(self.fold_accuracies),
                'mean': self.cv_mean,
                'std': self.cv_std,
            },
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], class_labels: List[str]) -> 'ModelMetrics':
        holdout = data['holdout']
        bundle = MetricsBundle(
            class_labels=list(class_labels),
            confusion=np.asarray(holdout['confusion'], dtype=np.int64),
            accuracy=float(holdout['accuracy']),
            precision=[float(p) for p in holdout['precision']],
            macro_precision=float(holdout['macro_precision']),
            degenerate_classes=list(holdout.get('degenerate_classes', [])),
        )
        return cls(kind=data['kind'], holdout=bundle, train_accuracy=float(data['train_accuracy']),
                   fold_accuracies=[float(a) for a in data['cv']['fold_accuracies']])


@dataclass
class EvaluationReport:
    """Comparison of every model in the roster plus run metadata."""
    class_labels: List[str]
    models: List[ModelMetrics]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def model(self, kind: str) -> ModelMetrics:
        for entry in self.models:
            if entry.kind == kind:
                return entry
        raise KeyError(kind)

    def best(self) -> ModelMetrics:
        """Highest holdout accuracy; earlier roster entries win ties."""
        best = self.models[0]
        for entry in self.models[1:]:
            if entry.accuracy > best.accuracy:
                best = entry
        return best

    def ranking(self) -> List[ModelMetrics]:
        """Models by holdout accuracy, descending, stable on ties."""
        return sorted(self.models, key=lambda m: -m.accuracy)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'schema_version': REPORT_SCHEMA_VERSION,
            'class_labels': list(self.class_labels),
            'models': [m.to_dict() for m in self.models],
            'metadata': dict(self.metadata),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EvaluationReport':
        labels = list(data['class_labels'])
        return cls(class_labels=labels,
                   models=[ModelMetrics.from_dict(m, labels) for m in data['models']],
                   metadata=dict(data.get('metadata', {})))

    def to_csv(self) -> str:
        """One row per model per fold, then holdout, train and CV summary rows."""
        rows: List[list] = []
        for entry in self.models:
            for fold, accuracy in enumerate(entry.fold_accuracies):
                rows.append([entry.kind, 'cv_fold', fold, repr(float(accuracy)), ''])
            rows.append([entry.kind, 'holdout', '', repr(entry.accuracy),
                         repr(entry.holdout.macro_precision)])
            rows.append([entry.kind, 'train', '', repr(entry.train_accuracy), ''])
            if entry.cv_mean is not None:
                rows.append([entry.kind, 'cv_mean', '', repr(entry.cv_mean), ''])
            if entry.cv_std is not None:
                rows.append([entry.kind, 'cv_std', '', repr(entry.cv_std), ''])
        frame = pd.DataFrame(rows, columns=REPORT_CSV_COLUMNS)
        return frame.to_csv(index=False, lineterminator='\n')

    def __repr__(self):
        return f"<EvaluationReport(models={len(self.models)}, classes={len(self.class_labels)})>"
