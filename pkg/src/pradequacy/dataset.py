"""Observed data tables: CSV ingestion, lagging and sub-sample splits."""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, PreconditionError


@dataclass(frozen=True)
class DataTable:
    """Named numeric columns of equal length.

    Parameters
    ----------
    names : tuple of str
        Column names, unique, in display order.
    values : ndarray, shape (n, ncols)
        Column-major data; stored read-only.
    time_ordered : bool
        Whether the row index is a meaningful ordering (required for lags
        and for dependence tests).
    """

    names: tuple[str, ...]
    values: np.ndarray = field(repr=False)
    time_ordered: bool = True

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError("table values must be two-dimensional")
        names = tuple(str(n) for n in self.names)
        if len(names) != values.shape[1]:
            raise DataError(f"{len(names)} names for {values.shape[1]} columns")
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DataError(f"duplicate column names: {', '.join(dup)}")
        if values.shape[0] < 1:
            raise DataError("no rows")
        if not np.all(np.isfinite(values)):
            raise DataError("table values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_columns(cls, columns: Mapping[str, Iterable[float]],
                     time_ordered: bool = True) -> DataTable:
        names = list(columns)
        arrays = [np.asarray(list(columns[n]), dtype=float) for n in names]
        lengths = {a.shape[0] for a in arrays}
        if len(lengths) > 1:
            raise DataError("all columns must have the same length")
        return cls(tuple(names), np.column_stack(arrays) if arrays else np.empty((0, 0)),
                   time_ordered)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    def __contains__(self, name: object) -> bool:
        return name in self.names

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.names.index(name)]
        except ValueError:
            raise DataError(f"no column named {name!r}") from None

    def columns(self, names: Sequence[str]) -> np.ndarray:
        return np.column_stack([self.column(n) for n in names]) if names else np.empty((self.n, 0))

    def select(self, names: Sequence[str]) -> DataTable:
        return DataTable(tuple(names), self.columns(names), self.time_ordered)

    def rows(self, start: int, stop: int) -> DataTable:
        return DataTable(self.names, self.values[start:stop], self.time_ordered)

    def with_columns(self, new: Mapping[str, np.ndarray]) -> DataTable:
        names = self.names + tuple(new)
        extra = [np.asarray(v, dtype=float) for v in new.values()]
        return DataTable(names, np.column_stack([self.values, *extra]), self.time_ordered)

    def with_time_order(self, time_ordered: bool) -> DataTable:
        return DataTable(self.names, self.values, time_ordered)

    def to_csv(self, path: str | Path) -> None:
        """Write with 17 significant digits, enough to round-trip every double."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(self.names) + "\n")
            for row in self.values:
                fh.write(",".join(format(v, ".17g") for v in row) + "\n")


@dataclass(frozen=True)
class VariableRoles:
    """Response/regressor split of a table; ``regressors`` is empty for univariate models."""

    response: str
    regressors: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "regressors", tuple(self.regressors))
        if self.response in self.regressors:
            raise DataError(f"response {self.response!r} also listed as a regressor")
        if len(set(self.regressors)) != len(self.regressors):
            raise DataError("regressors must be unique")

    def validate(self, table: DataTable) -> None:
        for name in (self.response, *self.regressors):
            if name not in table:
                raise DataError(f"column {name!r} not found; table has {', '.join(table.names)}")


def load_csv(path: str | Path, time_ordered: bool = True) -> DataTable:
    """Read a numeric CSV with a mandatory header row."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file (no header)") from None
        if not header or any(h == "" for h in header):
            raise DataError(f"{path}: blank column name in header")
        seen = set()
        for h in header:
            if h in seen:
                raise DataError(f"{path}: duplicate header column {h!r}")
            seen.add(h)

        rows = []
        for rownum, record in enumerate(reader, start=1):
            if not record or all(c.strip() == "" for c in record):
                continue
            if len(record) != len(header):
                raise DataError(f"{path}: row {rownum} has {len(record)} fields, "
                                f"expected {len(header)}")
            parsed = []
            for name, cell in zip(header, record):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}: row {rownum}, column {name!r}: "
                                    f"cannot parse {cell!r} as a number") from None
                if not math.isfinite(v):
                    raise DataError(f"{path}: row {rownum}, column {name!r}: "
                                    f"non-finite value {cell!r}")
                parsed.append(v)
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no rows")
    return DataTable(tuple(header), np.array(rows, dtype=float), time_ordered)


def lag_name(column: str, lag: int) -> str:
    return f"{column}_lag{lag}"


def add_lags(table: DataTable, column: str, max_lag: int) -> DataTable:
    """Append ``column_lag1 .. column_lag{max_lag}`` and drop the first ``max_lag`` rows."""
    if not table.time_ordered:
        raise PreconditionError("lags require a time-ordered table")
    if max_lag < 1:
        raise PreconditionError("max_lag must be >= 1")
    if max_lag >= table.n:
        raise PreconditionError(f"max_lag={max_lag} must be smaller than n={table.n}")
    series = table.column(column)
    n = table.n
    lags = {lag_name(column, j): series[max_lag - j:n - j] for j in range(1, max_lag + 1)}
    trimmed = table.rows(max_lag, n)
    return trimmed.with_columns(lags)


def split_rows(table: DataTable, fraction: float) -> tuple[DataTable, DataTable]:
    """Cut the table after ``floor(fraction * n)`` rows."""
    if not (0.0 < fraction < 1.0):
        raise PreconditionError(f"fraction must lie in (0, 1), got {fraction}")
    cut = math.floor(fraction * table.n)
    if cut < 2 or table.n - cut < 2:
        raise PreconditionError(f"split at {fraction} of n={table.n} leaves a part "
                                "with fewer than 2 rows")
    return table.rows(0, cut), table.rows(cut, table.n)


def concat_rows(first: DataTable, second: DataTable) -> DataTable:
    if first.names != second.names:
        raise DataError("tables have different columns")
    return DataTable(first.names, np.vstack([first.values, second.values]),
                     first.time_ordered and second.time_ordered)
