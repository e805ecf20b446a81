"""
Feature statistics: correlation, p-value screening, min-max scaling and PCA.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from t2dmed.models.preprocess_state import FeatureReport, PcaState, ScalerState
from t2dmed.utils.errors import (
    DegenerateLabelsError, EmptySelectionError, ParameterError, ShapeError, ZeroVarianceError,
)
from t2dmed.utils.linalg import jacobi_eigh
from t2dmed.utils.special import chi2_survival, f_survival

logger = logging.getLogger(__name__)

DEFAULT_P_THRESHOLD = 0.05
DEFAULT_CORR_THRESHOLD = 0.9
DEFAULT_PCA_COMPONENTS = 2


def _class_indices(labels: Sequence) -> Tuple[np.ndarray, List]:
    classes = list(dict.fromkeys(labels))
    lookup = {c: i for i, c in enumerate(classes)}
    return np.array([lookup[label] for label in labels], dtype=np.int64), classes


class FeatureService:
    """Service for feature screening and transforms."""

    def pearson_correlation(self, a: Sequence[float], b: Sequence[float]) -> float:
        """
        Pearson correlation with population statistics.

        Evaluated as sum(da * db) / sqrt(sum(da^2) * sum(db^2)), which equals
        sum(da * db) / (n * sigma_a * sigma_b) and is exactly symmetric.
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape or a.ndim != 1:
            raise ShapeError(f"Correlation needs equal-length sequences, got {a.shape} and {b.shape}")
        if a.size < 2:
            raise ShapeError("Correlation needs at least 2 values")
        da = a - np.mean(a)
        db = b - np.mean(b)
        ss_a = float(np.sum(da * da))
        ss_b = float(np.sum(db * db))
        if ss_a == 0.0 or ss_b == 0.0:
            raise ZeroVarianceError("Correlation is undefined for a constant sequence")
        r = float(np.sum(da * db)) / math.sqrt(ss_a * ss_b)
        return min(1.0, max(-1.0, r))

    def correlation_matrix(self, features: np.ndarray) -> np.ndarray:
        """Pairwise correlations; rows and columns of constant features are 0."""
        features = np.asarray(features, dtype=np.float64)
        d = features.shape[1]
        constant = [bool(np.all(features[:, j] == features[0, j])) for j in range(d)]
        corr = np.zeros((d, d))
        for i in range(d):
            if constant[i]:
                continue
            corr[i, i] = 1.0
            for j in range(i + 1, d):
                if constant[j]:
                    continue
                r = self.pearson_correlation(features[:, i], features[:, j])
                corr[i, j] = r
                corr[j, i] = r
        return corr

    def feature_p_values(self, features: np.ndarray, labels: Sequence,
                         categorical: Optional[Sequence[bool]] = None) -> List[float]:
        """
        Per-feature p-value for association with the labels.

        Numeric features use the one-way ANOVA F-test of equal class means;
        features flagged categorical use the chi-square independence test.

        Raises:
            DegenerateLabelsError: fewer than two classes, or a class with fewer than two samples
        """
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != len(labels):
            raise ShapeError(f"Feature matrix {features.shape} does not match {len(labels)} labels")
        codes, classes = _class_indices(list(labels))
        if len(classes) < 2:
            raise DegenerateLabelsError("p-values need at least two classes")
        counts = np.bincount(codes, minlength=len(classes))
        if counts.min() < 2:
            raise DegenerateLabelsError("p-values need at least two samples per class")
        flags = list(categorical) if categorical is not None else [False] * features.shape[1]

        p_values = []
        for j in range(features.shape[1]):
            column = features[:, j]
            if flags[j]:
                p_values.append(self._chi_square_p(column, codes, len(classes)))
            else:
                p_values.append(self._anova_p(column, codes, counts))
        return p_values

    def _anova_p(self, column: np.ndarray, codes: np.ndarray, counts: np.ndarray) -> float:
        k = len(counts)
        n = column.size
        grand = float(np.mean(column))
        ss_between = 0.0
        ss_within = 0.0
        for c in range(k):
            group = column[codes == c]
            mean_c = float(np.mean(group))
            ss_between += counts[c] * (mean_c - grand) ** 2
            ss_within += float(np.sum((group - mean_c) ** 2))
        if ss_between == 0.0:
            return 1.0
        if ss_within == 0.0:
            return 0.0
        f_stat = (ss_between / (k - 1)) / (ss_within / (n - k))
        return f_survival(f_stat, k - 1, n - k)

    def _chi_square_p(self, column: np.ndarray, codes: np.ndarray, n_classes: int) -> float:
        values, value_codes = np.unique(column, return_inverse=True)
        if len(values) < 2:
            return 1.0
        observed = np.zeros((len(values), n_classes))
        np.add.at(observed, (value_codes, codes), 1.0)
        expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / observed.sum()
        mask = expected > 0
        statistic = float(np.sum((observed[mask] - expected[mask]) ** 2 / expected[mask]))
        dof = (len(values) - 1) * (n_classes - 1)
        return chi2_survival(statistic, dof)

    def select_features(self, features: np.ndarray, labels: Sequence,
                        p_threshold: float = DEFAULT_P_THRESHOLD,
                        corr_threshold: float = DEFAULT_CORR_THRESHOLD,
                        names: Optional[Sequence[str]] = None,
                        categorical: Optional[Sequence[bool]] = None) -> FeatureReport:
        """
        Drop weakly associated features, then break up collinear pairs.

        Features with p >= p_threshold are dropped as ``high_p``. Among the
        survivors, while some pair has |r| > corr_threshold, the pair with the
        largest |r| (earliest pair on ties) loses the member with the larger
        mean |r| to the other survivors; on a tie the later feature goes.

        Raises:
            ParameterError: threshold outside (0, 1]
            EmptySelectionError: every feature dropped
        """
        for label, value in (('p_threshold', p_threshold), ('corr_threshold', corr_threshold)):
            if not 0.0 < value <= 1.0:
                raise ParameterError(f"{label} must be in (0, 1], got {value}")
        features = np.asarray(features, dtype=np.float64)
        d = features.shape[1]
        names = list(names) if names is not None else [f"x{j}" for j in range(d)]
        if len(names) != d:
            raise ShapeError(f"{len(names)} names given for {d} features")

        p_values = self.feature_p_values(features, labels, categorical)
        corr = self.correlation_matrix(features)
        dropped: List[Tuple[str, str]] = []
        survivors = []
        for j in range(d):
            if p_values[j] < p_threshold:
                survivors.append(j)
            else:
                dropped.append((names[j], 'high_p'))

        while True:
            worst = None
            for a_pos, i in enumerate(survivors):
                for j in survivors[a_pos + 1:]:
                    r = abs(corr[i, j])
                    if r > corr_threshold and (worst is None or r > worst[0]):
                        worst = (r, i, j)
            if worst is None:
                break
            _, i, j = worst
            mean_i = self._mean_abs_corr(corr, i, survivors)
            mean_j = self._mean_abs_corr(corr, j, survivors)
            loser = i if mean_i > mean_j else j
            survivors.remove(loser)
            dropped.append((names[loser], 'collinear'))
            logger.debug(f"Dropped collinear feature {names[loser]} (|r|={worst[0]:.4f})")

        if not survivors:
            raise EmptySelectionError("Feature selection dropped every feature")

        selected = [names[j] for j in survivors]
        logger.info(f"Selected {len(selected)} of {d} features: {', '.join(selected)}")
        return FeatureReport(feature_names=names, p_values=p_values, correlation=corr,
                             dropped=dropped, selected=selected)

    def _mean_abs_corr(self, corr: np.ndarray, index: int, survivors: List[int]) -> float:
        others = [abs(corr[index, j]) for j in survivors if j != index]
        return math.fsum(others) / len(others) if others else 0.0

    def min_max_fit(self, features: np.ndarray) -> ScalerState:
        """Column minima and maxima of the training matrix."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] < 1:
            raise ShapeError("min-max fit needs at least one row")
        return ScalerState(features.min(axis=0), features.max(axis=0))

    def min_max_transform(self, features: np.ndarray, scaler: ScalerState) -> np.ndarray:
        """
        Map each feature to (x - min) / (max - min).

        Constant features map to 0.0; values outside the fitted range are
        not clamped.
        """
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != scaler.n_features:
            raise ShapeError(f"Scaler fitted on {scaler.n_features} features, got shape {features.shape}")
        span = scaler.maxs - scaler.mins
        scaled = np.zeros_like(features)
        varying = span > 0
        scaled[:, varying] = (features[:, varying] - scaler.mins[varying]) / span[varying]
        return scaled

    def pca_fit(self, features: np.ndarray, k: int = DEFAULT_PCA_COMPONENTS) -> PcaState:
        """
        Principal components of the sample covariance (1/(n-1)).

        Components are ordered by descending eigenvalue and each is signed so
        that its largest-magnitude entry is positive.
        """
        features = np.asarray(features, dtype=np.float64)
        n, d = features.shape
        if k < 1 or k > d:
            raise ParameterError(f"PCA needs 1 <= k <= {d}, got k={k}")
        if n < 2:
            raise ParameterError("PCA needs at least 2 rows")
        mean = features.mean(axis=0)
        centered = features - mean
        cov = centered.T @ centered / (n - 1)
        cov = (cov + cov.T) / 2.0
        eigenvalues, vectors = jacobi_eigh(cov)
        components = vectors.T.copy()
        for row in components:
            pivot = int(np.argmax(np.abs(row)))
            if row[pivot] < 0:
                row *= -1.0
        eigenvalues = np.maximum(eigenvalues, 0.0)
        return PcaState(mean_vector=mean, components=components[:k], eigenvalues=eigenvalues)

    def pca_transform(self, features: np.ndarray, pca: PcaState) -> np.ndarray:
        """Project centered rows onto the components."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != len(pca.mean_vector):
            raise ShapeError(f"PCA fitted on {len(pca.mean_vector)} features, got shape {features.shape}")
        return (features - pca.mean_vector) @ pca.components.T


# Global service instance
feature_service = FeatureService()
