"""Series storage, file ingestion and prefix sums.

All public indices are 1-based and inclusive, so ``S[i:j]`` in the
matching literature is ``series.subsequence(i, j)`` here.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataError

__all__ = [
    "TimeSeries",
    "PrefixSums",
    "load_series",
    "save_series",
    "build_prefix_sums",
    "range_sums",
]


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An immutable univariate series with at least two finite values."""

    values: np.ndarray
    name: str = "series"

    def __post_init__(self):
        try:
            arr = _frozen(self.values)
        except (TypeError, ValueError) as exc:
            raise DataError(f"series {self.name!r}: values are not numeric") from exc
        if arr.size < 2:
            raise DataError(f"series {self.name!r} has {arr.size} value(s); at least 2 are required")
        if not np.isfinite(arr).all():
            bad = int(np.flatnonzero(~np.isfinite(arr))[0]) + 1
            raise DataError(f"series {self.name!r}: non-finite value at position {bad}")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def subsequence(self, i: int, j: int) -> np.ndarray:
        """Read-only view of positions ``i..j`` (1-based, inclusive)."""
        _check_range(i, j, self.n)
        return self.values[i - 1 : j]


@dataclass(frozen=True, eq=False)
class PrefixSums:
    """``p1[t] = sum S[1..t]`` and ``p2[t] = sum u*S[u] for u in 1..t``; both start at 0."""

    p1: np.ndarray
    p2: np.ndarray

    @property
    def n(self) -> int:
        return self.p1.shape[0] - 1


def _check_range(i: int, j: int, n: int) -> None:
    if not (1 <= i <= j <= n):
        raise IndexError(f"range [{i}, {j}] is outside [1, {n}]")


def build_prefix_sums(s: TimeSeries) -> PrefixSums:
    x = s.values
    t = np.arange(1, x.shape[0] + 1, dtype=np.float64)
    p1 = np.zeros(x.shape[0] + 1)
    p2 = np.zeros(x.shape[0] + 1)
    # np.cumsum accumulates strictly left to right
    np.cumsum(x, out=p1[1:])
    np.cumsum(t * x, out=p2[1:])
    p1.setflags(write=False)
    p2.setflags(write=False)
    return PrefixSums(p1, p2)


def range_sums(ps: PrefixSums, i: int, j: int) -> tuple[float, float]:
    """Return ``(sum S[t], sum (t-i+1)*S[t])`` over ``t = i..j``.

    The second sum uses the subsequence's local index ``k = 1..j-i+1``.
    """
    _check_range(i, j, ps.n)
    sum_x = ps.p1[j] - ps.p1[i - 1]
    sum_kx = (ps.p2[j] - ps.p2[i - 1]) - (i - 1) * sum_x
    return float(sum_x), float(sum_kx)


def _parse_float(token: str, path, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"{path}:{lineno}: not a number: {token.strip()!r}") from None
    if not math.isfinite(value):
        raise DataError(f"{path}:{lineno}: non-finite value {token.strip()!r}")
    return value


def load_series(
    path,
    format: str = "plain",
    column: int = 0,
    skip_header: bool = False,
    name: str | None = None,
) -> TimeSeries:
    """Read a series from disk.

    Parameters
    ----------
    path:
        File to read.
    format:
        ``"plain"`` (one real per line) or ``"csv"``.
    column:
        0-based column for the csv format.
    skip_header:
        Drop the first row of a csv file.
    name:
        Series name; defaults to the file stem.
    """
    path = Path(path)
    name = path.stem if name is None else name
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc

    values: list[float] = []
    if format == "plain":
        lines = text.splitlines()
        while lines and not lines[-1].strip():
            lines.pop()
        for lineno, line in enumerate(lines, start=1):
            values.append(_parse_float(line, path, lineno))
    elif format == "csv":
        if column < 0:
            raise DataError(f"csv column must be >= 0, got {column}")
        rows = csv.reader(text.splitlines())
        for lineno, row in enumerate(rows, start=1):
            if skip_header and lineno == 1:
                continue
            if not row or not any(cell.strip() for cell in row):
                continue
            if column >= len(row):
                raise DataError(f"{path}:{lineno}: no column {column} (row has {len(row)})")
            values.append(_parse_float(row[column], path, lineno))
    else:
        raise DataError(f"unknown series format {format!r}; expected 'plain' or 'csv'")

    if len(values) < 2:
        raise DataError(f"{path}: {len(values)} value(s) read; at least 2 are required")
    return TimeSeries(np.asarray(values), name=name)


def save_series(s: TimeSeries, path) -> None:
    """Write ``s`` in the plain format; ``repr`` keeps the round trip bit-exact."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in s.values.tolist():
            fh.write(repr(v))
            fh.write("\n")
