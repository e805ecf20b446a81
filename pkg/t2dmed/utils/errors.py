"""
Exception hierarchy for the classification suite.

Every error carries the CLI exit code it maps to:
2 configuration, 3 data, 4 numerical.
"""
from typing import Iterable, Optional


class T2DMedError(Exception):
    """Base exception for all suite errors."""
    exit_code = 1


class ConfigError(T2DMedError):
    """Invalid configuration or parameter value."""
    exit_code = 2


class ParameterError(ConfigError):
    """Operation parameter outside its valid range."""
    pass


class DataError(T2DMedError):
    """Input data does not satisfy an operation's preconditions."""
    exit_code = 3


class SchemaError(DataError):
    """CSV header or schema document does not match."""

    def __init__(self, message: str, column: Optional[str] = None):
        super().__init__(message)
        self.column = column


class ParseError(DataError):
    """Cell value could not be parsed."""

    def __init__(self, message: str, row: int, column: str):
        super().__init__(f"{message} (row {row}, column '{column}')")
        self.row = row
        self.column = column


class DegenerateColumnError(DataError):
    """Column has no observed values to compute a statistic from."""
    pass


class ColumnTypeError(DataError):
    """Operation applied to a column of the wrong kind."""
    pass


class UnknownCategoryError(DataError):
    """Category label not present in the fitted encoder."""

    def __init__(self, column: str, label: str):
        super().__init__(f"Unknown category '{label}' in column '{column}'")
        self.column = column
        self.label = label


class MissingFeatureError(DataError):
    """Prediction input lacks features the model expects."""

    def __init__(self, missing: Iterable[str]):
        self.missing = list(missing)
        super().__init__(f"Missing features: {', '.join(self.missing)}")


class DegenerateLabelsError(DataError):
    """Fewer than two classes present."""
    pass


class EmptySelectionError(DataError):
    """Feature selection dropped every feature."""
    pass


class LabelError(DataError):
    """Label outside the declared class list."""
    pass


class ShapeError(DataError):
    """Matrix shape does not match fitted state."""
    pass


class NumericalError(T2DMedError):
    """Computation produced a non-finite or singular result."""
    exit_code = 4


class ZeroVarianceError(NumericalError):
    """Sequence has zero variance."""
    pass


class SingularMatrixError(NumericalError):
    """Matrix could not be factorized."""
    pass


class DivergenceError(NumericalError):
    """Training loss became non-finite."""

    def __init__(self, epoch: int, loss: float):
        super().__init__(f"Training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class ModelFileError(T2DMedError):
    """Model file cannot be read."""
    exit_code = 3


class FormatError(ModelFileError):
    """Model file is corrupt."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class VersionError(ModelFileError):
    """Model file schema version is not supported."""
    pass


class FoldError(T2DMedError):
    """Training failed inside a cross-validation fold."""

    def __init__(self, fold: int, cause: T2DMedError):
        super().__init__(f"Fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause
        self.exit_code = cause.exit_code


class StageError(T2DMedError):
    """Experiment stage failed; keeps the exit code of the cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"Stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, 'exit_code', 1)
