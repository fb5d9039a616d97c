"""Mixed-type tables: schema, CSV ingestion and column groups.

A :class:`MixedDataTable` is the universe of elements every other module
works on. Elements are identified by their row position.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import (
    EmptyFile,
    EmptyTable,
    IncompatibleKinds,
    MissingColumn,
    TooManyLevels,
    UnknownCategoryLevel,
    UnknownFeature,
    UnparseableNumeric,
    DataError,
)


class FeatureKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"
    ORDINAL = "ordinal"

    @classmethod
    def parse(cls, text: str) -> "FeatureKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise DataError(f"unknown feature kind {text!r}") from None


@dataclass(frozen=True)
class Feature:
    name: str
    kind: FeatureKind
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise DataError("feature names must be non-empty")
        if self.kind is FeatureKind.NUMERIC and self.levels:
            raise DataError(f"numeric feature {self.name!r} cannot declare levels")
        if len(set(self.levels)) != len(self.levels):
            raise DataError(f"duplicate levels for feature {self.name!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind is FeatureKind.NUMERIC


@dataclass(frozen=True)
class Schema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        if not self.features:
            raise DataError("a schema needs at least one feature")
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError("feature names must be unique")

    def __len__(self):
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def index(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise UnknownFeature(name)

    def __getitem__(self, name: str) -> Feature:
        return self.features[self.index(name)]

    def names_of_kind(self, *kinds: FeatureKind) -> list[str]:
        return [f.name for f in self.features if f.kind in kinds]

    # schema file: one ``name:kind[:level1|level2|...]`` line per feature
    def dumps(self) -> str:
        lines = []
        for f in self.features:
            line = f"{f.name}:{f.kind.value}"
            if f.levels:
                line += ":" + "|".join(f.levels)
            lines.append(line)
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Schema":
        features = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(":", 2)
            if len(parts) < 2:
                raise DataError(f"schema line {lineno}: expected name:kind[:levels]")
            kind = FeatureKind.parse(parts[1])
            levels = tuple(parts[2].split("|")) if len(parts) == 3 and parts[2] else ()
            features.append(Feature(parts[0].strip(), kind, levels))
        return cls(tuple(features))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Schema":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class MixedDataTable:
    """Immutable table of mixed numeric/categorical/ordinal rows."""

    schema: Schema
    rows: tuple[tuple, ...]
    _checked: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        p = len(self.schema)
        for i, row in enumerate(self.rows):
            if len(row) != p:
                raise DataError(f"row {i} has {len(row)} cells, expected {p}")
            if self._checked:
                continue
            for j, (value, feat) in enumerate(zip(row, self.schema)):
                if feat.is_numeric:
                    if isinstance(value, str) or not math.isfinite(value):
                        raise UnparseableNumeric(i, j, value)
                elif value not in feat.levels:
                    raise UnknownCategoryLevel(i, j, value)

    def __eq__(self, other):
        return (isinstance(other, MixedDataTable) and self.schema == other.schema
                and self.rows == other.rows)

    def __hash__(self):
        return hash((self.schema, self.rows))

    def __len__(self):
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def element_ids(self) -> list[int]:
        return list(range(len(self.rows)))

    def column(self, name: str) -> np.ndarray:
        j = self.schema.index(name)
        if self.schema.features[j].is_numeric:
            return self.encoded[:, j].copy()
        return np.array([row[j] for row in self.rows], dtype=object)

    @cached_property
    def encoded(self) -> np.ndarray:
        """Float matrix: numeric values as-is, levels as their 0-based rank."""
        out = np.empty((len(self.rows), len(self.schema)), dtype=float)
        for j, feat in enumerate(self.schema):
            if feat.is_numeric:
                out[:, j] = [row[j] for row in self.rows]
            else:
                lookup = {lvl: k for k, lvl in enumerate(feat.levels)}
                out[:, j] = [lookup[row[j]] for row in self.rows]
        out.setflags(write=False)
        return out

    def take(self, indices: Sequence[int]) -> "MixedDataTable":
        return MixedDataTable(self.schema, [self.rows[i] for i in indices], _checked=True)

    @classmethod
    def from_columns(cls, columns: dict, schema: Schema | None = None) -> "MixedDataTable":
        """Build a table from a name -> values mapping (a DataFrame works too).

        Without a schema, numeric dtypes become numeric features and anything
        else a categorical feature with its sorted distinct values as levels.
        """
        names = list(columns.keys())
        data = {name: list(columns[name]) for name in names}
        if schema is None:
            feats = []
            for name in names:
                values = data[name]
                if all(_is_real(v) for v in values):
                    feats.append(Feature(str(name), FeatureKind.NUMERIC))
                else:
                    feats.append(Feature(str(name), FeatureKind.CATEGORICAL,
                                         tuple(sorted({str(v) for v in values}))))
            schema = Schema(tuple(feats))
        converted = []
        for feat, name in zip(schema, names):
            if feat.is_numeric:
                converted.append([float(v) for v in data[name]])
            else:
                converted.append([str(v) for v in data[name]])
        return cls(schema, list(zip(*converted)))

    @classmethod
    def from_array(cls, X, names: Sequence[str] | None = None) -> "MixedDataTable":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if names is None:
            names = [f"x{j}" for j in range(X.shape[1])]
        schema = Schema(tuple(Feature(nm, FeatureKind.NUMERIC) for nm in names))
        return cls(schema, [tuple(float(v) for v in row) for row in X])

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.schema.names)
        for row in self.rows:
            writer.writerow([repr(float(v)) if f.is_numeric else v
                             for v, f in zip(row, self.schema)])
        return buf.getvalue()

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _is_real(value) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, (int, float, np.integer, np.floating)):
        return math.isfinite(float(value))
    return False


def _parse_float(text: str):
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _read_records(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        records = [rec for rec in csv.reader(fh) if rec]
    if not records:
        raise EmptyFile(f"{path}: no header")
    header = [h.strip() for h in records[0]]
    return header, records[1:]


def load_csv(path, schema: Schema) -> MixedDataTable:
    """Read ``path`` and parse each cell according to ``schema``."""
    header, records = _read_records(path)
    for name in schema.names:
        if name not in header:
            raise MissingColumn(name)
    if header[:len(schema)] != schema.names or len(header) != len(schema):
        raise DataError(f"{path}: header {header} does not match schema {schema.names}")
    if not records:
        raise EmptyFile(f"{path}: no data rows")

    rows = []
    for i, rec in enumerate(records):
        if len(rec) != len(schema):
            raise DataError(f"row {i} has {len(rec)} cells, expected {len(schema)}")
        row = []
        for j, (cell, feat) in enumerate(zip(rec, schema)):
            if feat.is_numeric:
                value = _parse_float(cell)
                if value is None:
                    raise UnparseableNumeric(i, j, cell)
                row.append(value)
            else:
                if cell not in feat.levels:
                    raise UnknownCategoryLevel(i, j, cell)
                row.append(cell)
        rows.append(tuple(row))
    return MixedDataTable(schema, rows, _checked=True)


def infer_schema(path, max_levels: int = 100) -> Schema:
    """Guess feature kinds from the file contents.

    A column whose non-empty cells all parse as reals is numeric; anything
    else is categorical with its sorted distinct values as levels.
    """
    header, records = _read_records(path)
    if not records:
        raise EmptyFile(f"{path}: no data rows")
    features = []
    for j, name in enumerate(header):
        cells = [rec[j] for rec in records if j < len(rec)]
        non_empty = [c for c in cells if c.strip()]
        if non_empty and all(_parse_float(c) is not None for c in non_empty):
            features.append(Feature(name, FeatureKind.NUMERIC))
            continue
        levels = sorted(set(cells))
        if len(levels) > max_levels:
            raise TooManyLevels(name, len(levels), max_levels)
        features.append(Feature(name, FeatureKind.CATEGORICAL, tuple(levels)))
    return Schema(tuple(features))


@dataclass(frozen=True)
class FeatureGroup:
    """A column selection of a table, feeding one prenetwork."""

    table: MixedDataTable
    names: tuple[str, ...]

    @property
    def features(self) -> list[Feature]:
        return [self.table.schema[nm] for nm in self.names]

    @property
    def indices(self) -> list[int]:
        return [self.table.schema.index(nm) for nm in self.names]

    @property
    def kinds(self) -> set[FeatureKind]:
        return {f.kind for f in self.features}

    @property
    def is_numeric(self) -> bool:
        return self.kinds == {FeatureKind.NUMERIC}

    @property
    def is_categorical(self) -> bool:
        return FeatureKind.NUMERIC not in self.kinds

    def values(self) -> np.ndarray:
        """Encoded ``(n, len(names))`` float matrix (levels as ranks)."""
        return self.table.encoded[:, self.indices]

    def __len__(self):
        return len(self.names)


def feature_group(table: MixedDataTable, names: Iterable[str],
                  allow_mixed: bool = False) -> FeatureGroup:
    names = tuple(names)
    if not names:
        raise DataError("a feature group needs at least one feature")
    for nm in names:
        table.schema.index(nm)
    group = FeatureGroup(table, names)
    if not allow_mixed and not (group.is_numeric or group.is_categorical):
        raise IncompatibleKinds(
            f"features {list(names)} mix numeric and categorical kinds; "
            "use the Gower metric for mixed groups")
    return group


def require_rows(table: MixedDataTable) -> None:
    if table.n == 0:
        raise EmptyTable("table has no rows")
