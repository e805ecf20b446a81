"""
Tabular data models: column schema, column-oriented table, encoder maps.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence

import numpy as np

from t2dmed.utils.errors import SchemaError

ColumnKind = Literal['numeric', 'categorical']
ColumnRole = Literal['feature', 'target', 'identifier']


@dataclass(frozen=True)
class ColumnSchema:
    """Name, kind and role of one column."""
    name: str
    kind: ColumnKind
    role: ColumnRole = 'feature'
    encoded_from: Optional[str] = None  # source categorical column of an encoded column

    def to_dict(self) -> Dict[str, str]:
        return {'name': self.name, 'kind': self.kind, 'role': self.role}

    def __repr__(self):
        return f"<ColumnSchema(name='{self.name}', kind='{self.kind}', role='{self.role}')>"


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Column:
    """
    Values plus per-cell missing flags.

    Numeric columns hold float64 values (NaN where missing); categorical
    columns hold an object array of labels (None where missing).
    """
    values: np.ndarray
    missing: np.ndarray

    @classmethod
    def numeric(cls, values: Sequence[float], missing: Optional[Sequence[bool]] = None) -> 'Column':
        arr = np.asarray(values, dtype=np.float64)
        flags = np.isnan(arr) if missing is None else np.asarray(missing, dtype=bool)
        arr = np.where(flags, np.nan, arr)
        return cls(_frozen(arr), _frozen(flags))

    @classmethod
    def categorical(cls, values: Sequence[Optional[str]]) -> 'Column':
        arr = np.empty(len(values), dtype=object)
        arr[:] = list(values)
        flags = np.array([v is None for v in values], dtype=bool)
        return cls(_frozen(arr), _frozen(flags))

    def __len__(self) -> int:
        return len(self.values)

    def take(self, indices: np.ndarray) -> 'Column':
        return Column(_frozen(self.values[indices]), _frozen(self.missing[indices]))


@dataclass(frozen=True, eq=False)
class Table:
    """
    Column-oriented dataset.

    Operations never mutate a Table; they return new ones. ``row_ids`` keeps
    the original row positions through shuffles and splits.
    """
    schema: List[ColumnSchema]
    columns: Dict[str, Column]
    row_ids: np.ndarray = field(default=None)

    def __post_init__(self):
        names = [c.name for c in self.schema]
        if len(set(names)) != len(names):
            raise SchemaError("Duplicate column names in schema")
        if set(names) != set(self.columns):
            missing = sorted(set(names) ^ set(self.columns))
            raise SchemaError(f"Schema and columns disagree on: {', '.join(missing)}", missing[0])
        lengths = {len(col) for col in self.columns.values()}
        if len(lengths) > 1:
            raise SchemaError(f"Columns have differing lengths: {sorted(lengths)}")
        n_rows = lengths.pop() if lengths else 0
        if self.row_ids is None:
            object.__setattr__(self, 'row_ids', _frozen(np.arange(n_rows, dtype=np.int64)))
        elif len(self.row_ids) != n_rows:
            raise SchemaError("row_ids length does not match n_rows")

    @property
    def n_rows(self) -> int:
        return len(self.row_ids)

    @property
    def column_names(self) -> List[str]:
        return [c.name for c in self.schema]

    def schema_for(self, name: str) -> ColumnSchema:
        for col in self.schema:
            if col.name == name:
                return col
        raise SchemaError(f"Unknown column '{name}'", name)

    def column(self, name: str) -> Column:
        if name not in self.columns:
            raise SchemaError(f"Unknown column '{name}'", name)
        return self.columns[name]

    def feature_names(self) -> List[str]:
        return [c.name for c in self.schema if c.role == 'feature']

    def target_name(self) -> str:
        """Name of the single target column."""
        targets = [c.name for c in self.schema if c.role == 'target']
        if len(targets) != 1:
            raise SchemaError(f"Expected exactly one target column, found {len(targets)}")
        return targets[0]

    def replace_column(self, name: str, column: Column, schema: Optional[ColumnSchema] = None) -> 'Table':
        """New table with one column swapped out."""
        self.schema_for(name)
        new_schema = [schema if (schema is not None and c.name == name) else c for c in self.schema]
        new_columns = dict(self.columns)
        new_columns[name] = column
        return Table(new_schema, new_columns, self.row_ids)

    def expand_column(self, name: str, replacements: List[ColumnSchema], columns: List[Column]) -> 'Table':
        """New table with one column replaced, in place, by several."""
        new_schema: List[ColumnSchema] = []
        for col in self.schema:
            if col.name == name:
                new_schema.extend(replacements)
            else:
                new_schema.append(col)
        new_columns = {k: v for k, v in self.columns.items() if k != name}
        for sch, col in zip(replacements, columns):
            new_columns[sch.name] = col
        return Table(new_schema, new_columns, self.row_ids)

    def take(self, indices: np.ndarray) -> 'Table':
        """Rows at ``indices``, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        return Table(list(self.schema),
                     {name: col.take(indices) for name, col in self.columns.items()},
                     _frozen(self.row_ids[indices]))

    def matrix(self, names: Sequence[str]) -> np.ndarray:
        """Numeric columns stacked as an (n_rows x len(names)) float matrix."""
        if not names:
            return np.zeros((self.n_rows, 0))
        for name in names:
            if self.schema_for(name).kind != 'numeric':
                raise SchemaError(f"Column '{name}' is not numeric", name)
        return np.column_stack([np.asarray(self.columns[n].values, dtype=np.float64) for n in names])

    def labels(self, name: Optional[str] = None) -> List[str]:
        """Values of a categorical column (the target by default) as strings."""
        name = name or self.target_name()
        return [str(v) for v in self.columns[name].values]

    def __repr__(self):
        return f"<Table(n_rows={self.n_rows}, columns={len(self.schema)})>"


@dataclass(frozen=True)
class EncoderMap:
    """Fitted category list for one categorical column."""
    column: str
    categories: List[str]
    mode: Literal['integer', 'one_hot'] = 'integer'

    def index_of(self, label: str) -> int:
        try:
            return self.categories.index(label)
        except ValueError:
            return -1

    def output_names(self) -> List[str]:
        if self.mode == 'integer':
            return [self.column]
        return [f"{self.column}={category}" for category in self.categories]

    def to_dict(self) -> Dict[str, object]:
        return {'column': self.column, 'categories': list(self.categories), 'mode': self.mode}

    @classmethod
    def from_dict(cls, data: Dict[str, object]) -> 'EncoderMap':
        return cls(column=data['column'], categories=list(data['categories']), mode=data['mode'])

    def __repr__(self):
        return f"<EncoderMap(column='{self.column}', mode='{self.mode}', categories={len(self.categories)})>"
