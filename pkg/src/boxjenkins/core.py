"""Time-series value type, CSV ingestion and train/holdout splitting."""

from __future__ import annotations

import csv
import io
import math
import re
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np

from .errors import BoundsError, GapError, ParseError

_DATE_RE = re.compile(r"^\s*(\d{4})-(\d{1,2})\s*$")


def month_offset(start: tuple[int, int], k: int) -> tuple[int, int]:
    """Return the (year, month) that lies ``k`` months after ``start``."""
    year, month = start
    idx = year * 12 + (month - 1) + k
    return idx // 12, idx % 12 + 1


def format_month(ym: tuple[int, int]) -> str:
    return f"{ym[0]:04d}-{ym[1]:02d}"


def parse_month(text: str) -> tuple[int, int]:
    m = _DATE_RE.match(text)
    if m is None:
        raise ParseError(f"bad date {text!r}, expected YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise ParseError(f"bad month in {text!r}")
    return year, month


@dataclass(frozen=True)
class TimeSeries:
    """Immutable, gap-free, monthly-stepped series of finite reals.

    Parameters
    ----------
    values : array_like
        Observations in time order.
    start : tuple of int
        ``(year, month)`` of the first observation.
    period : int
        Observations per seasonal cycle (12 for monthly data).
    """

    values: np.ndarray
    start: tuple[int, int] = (1, 1)
    period: int = 12

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size < 1:
            raise BoundsError("a time series needs at least one value")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            raise ParseError(f"non-finite value at index {bad}")
        if int(self.period) < 1:
            raise BoundsError(f"period must be >= 1, got {self.period}")
        year, month = self.start
        if not 1 <= int(month) <= 12:
            raise BoundsError(f"start month must be 1..12, got {month}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "start", (int(year), int(month)))
        object.__setattr__(self, "period", int(self.period))

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> tuple[int, int]:
        return month_offset(self.start, len(self) - 1)

    def date(self, i: int) -> tuple[int, int]:
        return month_offset(self.start, i)

    def dates(self) -> list[str]:
        return [format_month(self.date(i)) for i in range(len(self))]

    def with_values(self, values, offset: int = 0) -> "TimeSeries":
        """New series sharing period, starting ``offset`` steps after this one."""
        return TimeSeries(values, month_offset(self.start, offset), self.period)

    def concat(self, other: "TimeSeries") -> "TimeSeries":
        if other.start != month_offset(self.end, 1):
            raise GapError(
                f"{format_month(other.start)} does not follow {format_month(self.end)}"
            )
        return TimeSeries(np.concatenate([self.values, other.values]), self.start, self.period)

    def to_csv(self, handle: TextIO | None = None) -> str:
        """Serialize as ``date,value`` CSV with round-trip float precision."""
        out = io.StringIO() if handle is None else handle
        out.write("date,value\n")
        for i, v in enumerate(self.values):
            out.write(f"{format_month(self.date(i))},{float(v)!r}\n")
        return out.getvalue() if handle is None else ""


@dataclass(frozen=True)
class SplitSeries:
    train: TimeSeries
    holdout: TimeSeries | None = field(default=None)

    @property
    def holdout_values(self) -> np.ndarray:
        return np.empty(0) if self.holdout is None else self.holdout.values


def from_csv(
    text: str | TextIO,
    date_column: str = "date",
    value_column: str = "value",
    period: int = 12,
) -> TimeSeries:
    """Read a monthly series from CSV text.

    The first row is a header naming at least ``date_column`` and
    ``value_column``. Dates are ``YYYY-MM`` and must advance one month per row.
    A headerless two-column file is accepted when its first row already
    parses as data. Row numbers in error messages count data rows from 1.
    """
    if isinstance(text, str):
        text = io.StringIO(text)
    rows = list(csv.reader(text))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError("empty CSV input")

    header = [c.strip() for c in rows[0]]
    if date_column in header and value_column in header:
        di, vi = header.index(date_column), header.index(value_column)
        body = rows[1:]
    elif len(header) >= 2 and _DATE_RE.match(header[0]):
        di, vi = 0, 1
        body = rows
    else:
        raise ParseError(
            f"header must contain columns {date_column!r} and {value_column!r}"
        )
    if not body:
        raise ParseError("CSV has a header but no data rows")

    values: list[float] = []
    start = prev = None
    for k, row in enumerate(body):
        rowno = k + 1
        if len(row) <= max(di, vi):
            raise ParseError(f"row {rowno}: expected at least {max(di, vi) + 1} columns")
        try:
            ym = parse_month(row[di])
        except ParseError as exc:
            raise ParseError(f"row {rowno}: {exc}") from None
        try:
            val = float(row[vi])
        except ValueError:
            raise ParseError(f"row {rowno}: value {row[vi].strip()!r} is not a number") from None
        if not math.isfinite(val):
            raise ParseError(f"row {rowno}: value {row[vi].strip()!r} is not finite")
        if prev is None:
            start = ym
        else:
            expected = month_offset(prev, 1)
            if ym != expected:
                raise GapError(
                    f"row {rowno}: expected {format_month(expected)}, got {format_month(ym)}"
                )
        prev = ym
        values.append(val)
    return TimeSeries(values, start, period)


def split(ts: TimeSeries, n_train: int) -> SplitSeries:
    """First ``n_train`` values for model building, the rest held out."""
    n = len(ts)
    if not 1 <= n_train <= n:
        raise BoundsError(f"n_train must lie in [1, {n}], got {n_train}")
    train = ts.with_values(ts.values[:n_train])
    if n_train == n:
        return SplitSeries(train, None)
    return SplitSeries(train, ts.with_values(ts.values[n_train:], offset=n_train))
