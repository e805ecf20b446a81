"""
Tabular service: CSV ingestion, imputation, categorical encoding and splitting.
"""
import json
import logging
import math
from collections import Counter
from pathlib import Path
from typing import List, Literal, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from t2dmed.config.pipeline_config import holdout_size
from t2dmed.models.table import Column, ColumnSchema, EncoderMap, Table
from t2dmed.utils.errors import (
    ColumnTypeError, DataError, DegenerateColumnError, ParameterError, ParseError,
    SchemaError, UnknownCategoryError,
)
from t2dmed.utils.rng import XorShift64Star

logger = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({'', 'NA'})
VALID_KINDS = ('numeric', 'categorical')
VALID_ROLES = ('feature', 'target', 'identifier')


class TabularService:
    """Service for reading, cleaning and partitioning tables."""

    def load_schema(self, path: Union[str, Path]) -> List[ColumnSchema]:
        """
        Read a schema file: a JSON array of {name, kind, role} objects.

        Raises:
            SchemaError: if the document is malformed
        """
        path = Path(path)
        try:
            document = json.loads(path.read_text(encoding='utf-8'))
        except FileNotFoundError as e:
            raise SchemaError(f"Schema file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise SchemaError(f"Schema file {path} is not valid JSON: {e.msg}") from e
        return self.parse_schema(document)

    def parse_schema(self, document: object) -> List[ColumnSchema]:
        if not isinstance(document, list):
            raise SchemaError("Schema must be a JSON array")
        schema = []
        for entry in document:
            if not isinstance(entry, dict) or set(entry) - {'name', 'kind', 'role'} or 'name' not in entry:
                raise SchemaError(f"Invalid schema entry: {entry!r}")
            name = entry['name']
            kind = entry.get('kind', 'numeric')
            role = entry.get('role', 'feature')
            if kind not in VALID_KINDS:
                raise SchemaError(f"Column '{name}' has invalid kind '{kind}'", name)
            if role not in VALID_ROLES:
                raise SchemaError(f"Column '{name}' has invalid role '{role}'", name)
            schema.append(ColumnSchema(name=name, kind=kind, role=role))
        return schema

    def save_schema(self, schema: Sequence[ColumnSchema], path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps([c.to_dict() for c in schema], indent=2) + '\n', encoding='utf-8')

    def load_csv(self, path: Union[str, Path], schema: Sequence[ColumnSchema]) -> Table:
        """
        Load a CSV file against a schema.

        Empty cells and the token "NA" are missing. Header order may differ
        from the schema, but the name sets must match exactly.

        Args:
            path: CSV file (UTF-8, comma-delimited, header row)
            schema: Expected columns

        Returns:
            Table in schema column order

        Raises:
            SchemaError: header does not match the schema
            ParseError: numeric cell could not be parsed (1-based data row)
        """
        path = Path(path)
        if not path.exists():
            raise DataError(f"CSV file not found: {path}")
        try:
            frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False,
                                encoding='utf-8', skipinitialspace=False)
        except pd.errors.EmptyDataError as e:
            raise SchemaError(f"CSV file {path} has no header row") from e
        except pd.errors.ParserError as e:
            raise DataError(f"CSV file {path} is malformed: {e}") from e

        header = [str(c) for c in frame.columns]
        expected = [c.name for c in schema]
        for name in expected:
            if name not in header:
                raise SchemaError(f"CSV header is missing column '{name}'", name)
        for name in header:
            if name not in expected:
                raise SchemaError(f"CSV header has unexpected column '{name}'", name)

        columns = {}
        for col in schema:
            raw = frame[col.name].tolist()
            if col.kind == 'numeric':
                columns[col.name] = self._parse_numeric(raw, col.name)
            else:
                columns[col.name] = Column.categorical(
                    [None if cell in MISSING_TOKENS else cell for cell in raw])

        table = Table(list(schema), columns)
        n_missing = sum(int(c.missing.sum()) for c in columns.values())
        logger.info(f"Loaded {path.name}: {table.n_rows} rows, {len(schema)} columns, {n_missing} missing cells")
        return table

    def _parse_numeric(self, cells: List[str], name: str) -> Column:
        values = np.empty(len(cells), dtype=np.float64)
        missing = np.zeros(len(cells), dtype=bool)
        for i, cell in enumerate(cells):
            if cell in MISSING_TOKENS:
                missing[i] = True
                values[i] = np.nan
                continue
            try:
                value = float(cell.strip())
            except ValueError:
                raise ParseError(f"Cannot parse '{cell}' as a number", i + 1, name)
            if not math.isfinite(value):
                raise ParseError(f"Non-finite value '{cell}'", i + 1, name)
            values[i] = value
        return Column.numeric(values, missing)

    def write_csv(self, table: Table, path: Union[str, Path], decimals: int = 1) -> None:
        """Write a table as CSV; missing cells are written empty."""
        data = {}
        for col in table.schema:
            column = table.columns[col.name]
            if col.kind == 'numeric':
                data[col.name] = ['' if m else f"{v:.{decimals}f}" for v, m in zip(column.values, column.missing)]
            else:
                data[col.name] = ['' if m else str(v) for v, m in zip(column.values, column.missing)]
        frame = pd.DataFrame(data, columns=table.column_names)
        frame.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')

    def impute_value(self, table: Table, column: str, strategy: Literal['mean', 'median'] = 'mean') -> float:
        """Mean or median of the observed cells of a numeric column."""
        if table.schema_for(column).kind != 'numeric':
            raise ColumnTypeError(f"Column '{column}' is categorical; mean/median imputation needs a numeric column")
        col = table.column(column)
        observed = col.values[~col.missing]
        if observed.size == 0:
            raise DegenerateColumnError(f"Column '{column}' has no observed values to impute from")
        if strategy == 'mean':
            return math.fsum(observed.tolist()) / observed.size
        if strategy == 'median':
            return float(np.median(observed))
        raise ParameterError(f"Unknown imputation strategy '{strategy}'")

    def fill_missing(self, table: Table, column: str, value: Union[float, str]) -> Table:
        """Replace every missing cell of ``column`` with ``value``."""
        col = table.column(column)
        if not col.missing.any():
            return table
        if table.schema_for(column).kind == 'numeric':
            values = np.where(col.missing, float(value), col.values)
            return table.replace_column(column, Column.numeric(values, np.zeros(len(values), dtype=bool)))
        values = [value if m else v for v, m in zip(col.values, col.missing)]
        return table.replace_column(column, Column.categorical(values))

    def impute(self, table: Table, column: str, strategy: Literal['mean', 'median'] = 'mean') -> Table:
        """Fill missing cells of a numeric column with its mean or median."""
        value = self.impute_value(table, column, strategy)
        return self.fill_missing(table, column, value)

    def mode_value(self, table: Table, column: str) -> str:
        """Most frequent observed label; ties go to the first-appearing label."""
        col = table.column(column)
        observed = [v for v, m in zip(col.values, col.missing) if not m]
        if not observed:
            raise DegenerateColumnError(f"Column '{column}' has no observed values to impute from")
        counts = Counter(observed)
        best = max(counts.values())
        return next(v for v in observed if counts[v] == best)

    def fit_encoder(self, table: Table, column: str, mode: Literal['integer', 'one_hot'] = 'integer') -> EncoderMap:
        """
        Fit the category list of a categorical column.

        Categories are kept in order of first appearance.
        """
        if table.schema_for(column).kind != 'categorical':
            raise ColumnTypeError(f"Column '{column}' is numeric; only categorical columns can be encoded")
        col = table.column(column)
        if col.missing.any():
            raise DataError(f"Column '{column}' has {int(col.missing.sum())} missing cells; impute before encoding")
        categories = list(dict.fromkeys(str(v) for v in col.values))
        return EncoderMap(column=column, categories=categories, mode=mode)

    def encode_labels(self, labels: Sequence[str], enc: EncoderMap) -> np.ndarray:
        """Category indices of ``labels``; unseen labels are an error."""
        lookup = {c: i for i, c in enumerate(enc.categories)}
        codes = np.empty(len(labels), dtype=np.int64)
        for i, label in enumerate(labels):
            if label is None:
                raise DataError(f"Column '{enc.column}' has a missing cell at row {i + 1}")
            code = lookup.get(str(label))
            if code is None:
                raise UnknownCategoryError(enc.column, str(label))
            codes[i] = code
        return codes

    def apply_encoder(self, table: Table, enc: EncoderMap) -> Table:
        """Replace a categorical column with its integer code or one-hot columns."""
        source = table.schema_for(enc.column)
        codes = self.encode_labels(list(table.column(enc.column).values), enc)
        no_missing = np.zeros(len(codes), dtype=bool)
        if enc.mode == 'integer':
            schema = ColumnSchema(enc.column, 'numeric', source.role, encoded_from=enc.column)
            return table.replace_column(enc.column, Column.numeric(codes.astype(np.float64), no_missing), schema)
        schemas = []
        columns = []
        for i, name in enumerate(enc.output_names()):
            schemas.append(ColumnSchema(name, 'numeric', source.role, encoded_from=enc.column))
            columns.append(Column.numeric((codes == i).astype(np.float64), no_missing))
        return table.expand_column(enc.column, schemas, columns)

    def decode_integer(self, codes: Sequence[float], enc: EncoderMap) -> List[str]:
        """Labels for integer codes."""
        return [enc.categories[int(c)] for c in codes]

    def split_train_test(self, table: Table, test_fraction: float, seed: int) -> Tuple[Table, Table]:
        """
        Shuffle rows with a seeded Fisher-Yates permutation and split.

        The test set takes the first round(test_fraction * n_rows) permuted
        rows (halves round up); the remainder is the training set.
        """
        if not 0.0 < test_fraction < 1.0:
            raise ParameterError(f"test_fraction must be in (0, 1), got {test_fraction}")
        if table.n_rows < 2:
            raise ParameterError(f"Need at least 2 rows to split, got {table.n_rows}")
        n_test = holdout_size(table.n_rows, test_fraction)
        if n_test < 1 or n_test >= table.n_rows:
            raise ParameterError(f"test_fraction {test_fraction} on {table.n_rows} rows gives {n_test} test rows; "
                                 f"both sides of the split need at least one row")
        permutation = XorShift64Star(seed).permutation(table.n_rows)
        test = table.take(permutation[:n_test])
        train = table.take(permutation[n_test:])
        logger.debug(f"Split {table.n_rows} rows into {train.n_rows} train / {test.n_rows} test (seed={seed})")
        return train, test


# Global service instance
tabular_service = TabularService()
