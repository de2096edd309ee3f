"""Loading, standardising and splitting tabular data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .exceptions import ConfigError, LoadError

ColumnRef = Union[str, int]


@dataclass
class DataMatrix:
    """A numeric n x d table with optional integer class labels.

    Parameters
    ----------
    values : ndarray of shape (n_samples, n_features)
        Rows are samples, columns are features.
    labels : ndarray of shape (n_samples,), optional
        Integer class codes.
    feature_names : list of str, optional
        One name per column of ``values``.
    """

    values: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[list[str]] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {self.values.shape}")
        n, d = self.values.shape
        if n < 2 or d < 1:
            raise ValueError(f"need at least 2 rows and 1 column, got {n}x{d}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("values contain NaN or infinite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            if self.labels.shape != (n,):
                raise ValueError(
                    f"labels must have length {n}, got shape {self.labels.shape}"
                )
            self.labels = self.labels.astype(int)
        if self.feature_names is not None:
            self.feature_names = [str(s) for s in self.feature_names]
            if len(self.feature_names) != d:
                raise ValueError(f"expected {d} feature names, got {len(self.feature_names)}")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def names(self) -> list[str]:
        if self.feature_names is not None:
            return list(self.feature_names)
        return [f"f{j}" for j in range(self.n_features)]

    def take_rows(self, idx) -> "DataMatrix":
        idx = np.asarray(idx, dtype=int)
        labels = None if self.labels is None else self.labels[idx]
        return DataMatrix(self.values[idx], labels, self.feature_names)

    def take_columns(self, idx) -> "DataMatrix":
        idx = np.asarray(idx, dtype=int)
        names = None
        if self.feature_names is not None:
            names = [self.feature_names[j] for j in idx]
        return DataMatrix(self.values[:, idx], self.labels, names)


@dataclass(frozen=True)
class Split:
    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int = field(default=0)


def _resolve_column(ref: ColumnRef, header: Optional[Sequence[str]], width: int) -> int:
    if isinstance(ref, (int, np.integer)):
        col = int(ref)
    elif header is not None and ref in header:
        col = list(header).index(ref)
    elif isinstance(ref, str) and ref.lstrip("-").isdigit():
        col = int(ref)
    else:
        raise ConfigError(f"label column {ref!r} not found in header")
    if not -width <= col < width:
        raise ConfigError(f"label column {ref!r} out of range for {width} columns")
    return col % width


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise LoadError(f"row {row}, column {col}: non-numeric cell {cell!r}") from None
    if not math.isfinite(value):
        raise LoadError(f"row {row}, column {col}: non-finite value {cell!r}")
    return value


def load_csv(
    path: Union[str, Path],
    has_header: bool = False,
    label_column: Optional[ColumnRef] = None,
) -> DataMatrix:
    """Read a comma-delimited numeric file.

    ``label_column`` may be a header name or a zero-based column index. The
    label column is removed from the features and parsed as integer codes.
    Row numbers in error messages count data rows from 0 (the header is not
    counted).
    """
    path = Path(path)
    if not path.is_file():
        raise LoadError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]

    header = None
    if has_header:
        if not rows:
            raise LoadError(f"{path}: empty file")
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise LoadError(f"{path}: no data rows")

    width = len(header) if header is not None else len(rows[0])
    label_col = None
    if label_column is not None:
        label_col = _resolve_column(label_column, header, width)

    feats, labels = [], []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise LoadError(f"row {i}: expected {width} columns, found {len(row)}")
        values = []
        for j, cell in enumerate(row):
            cell = cell.strip()
            if j == label_col:
                v = _parse_float(cell, i, j)
                if v != int(v):
                    raise LoadError(f"row {i}, column {j}: label {cell!r} is not an integer")
                labels.append(int(v))
            else:
                values.append(_parse_float(cell, i, j))
        feats.append(values)

    names = None
    if header is not None:
        names = [h for j, h in enumerate(header) if j != label_col]
    if label_col is not None and width == 1:
        raise LoadError(f"{path}: no feature columns besides the label")
    try:
        return DataMatrix(
            np.array(feats, dtype=float),
            np.array(labels, dtype=int) if label_col is not None else None,
            names,
        )
    except ValueError as exc:
        raise LoadError(f"{path}: {exc}") from None


def column_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and population standard deviations (divisor n)."""
    values = np.asarray(values, dtype=float)
    return values.mean(axis=0), values.std(axis=0)


def apply_standardization(values: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    # zero-variance columns collapse to zero instead of dividing by 0
    scale = np.where(std > 0, std, 1.0)
    out = (np.asarray(values, dtype=float) - mean) / scale
    out[:, std == 0] = 0.0
    return out


def standardize(x: DataMatrix) -> DataMatrix:
    """Zero-mean, unit-variance columns using the population convention."""
    mean, std = column_moments(x.values)
    return DataMatrix(apply_standardization(x.values, mean, std), x.labels, x.feature_names)


def split_half(x: Union[DataMatrix, int], seed: int) -> Split:
    """Random 50/50 partition of row indices; the train half gets the odd row."""
    n = x if isinstance(x, (int, np.integer)) else x.n_samples
    if n < 2:
        raise ValueError("split_half needs at least 2 rows")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = (n + 1) // 2
    return Split(np.sort(perm[:n_train]), np.sort(perm[n_train:]), seed)
