"""CSV ingestion and export.

Input formats:
  daily     header ``date,close`` — ISO-8601 dates, positive prices
  intraday  header ``date,time,price`` or ``date,time,return``

Malformed rows abort ingestion with the offending line number (fail-fast).
Days whose intraday bars reduce to zero returns are dropped, never imputed.
"""

from __future__ import annotations

import csv
from datetime import date as Date
from datetime import time as Time

import numpy as np

from dynevt.errors import DataError
from dynevt.timeseries import DatedSeries, IntradayPanel, PriceSeries

__all__ = [
    "load_daily_csv",
    "load_intraday_csv",
    "write_rows",
    "write_dated_series",
]


def _parse_date(raw: str, path, lineno: int) -> Date:
    try:
        return Date.fromisoformat(raw.strip())
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: bad date {raw!r}: {exc}") from None


def _parse_time(raw: str, path, lineno: int) -> Time:
    try:
        return Time.fromisoformat(raw.strip())
    except ValueError as exc:
        raise DataError(f"{path}:{lineno}: bad time {raw!r}: {exc}") from None


def _parse_float(raw: str, path, lineno: int, what: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise DataError(f"{path}:{lineno}: bad {what} {raw!r}") from None


def load_daily_csv(path) -> PriceSeries:
    """Read a ``date,close`` file into a PriceSeries (rows sorted by date)."""
    rows: list[tuple[Date, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:2]] != ["date", "close"]:
            raise DataError(f"{path}:1: expected header 'date,close', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            d = _parse_date(row[0], path, lineno)
            close = _parse_float(row[1], path, lineno, "price")
            if close <= 0.0:
                raise DataError(f"{path}:{lineno}: non-positive price {close}")
            rows.append((d, close))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: r[0])
    return PriceSeries(tuple(d for d, _ in rows), np.array([c for _, c in rows]))


def load_intraday_csv(path, value: str = "price",
                      return_kind: str = "log") -> IntradayPanel:
    """Read intraday bars grouped by day into an IntradayPanel.

    value="price" computes within-day returns from consecutive bar prices
    (per `return_kind`); value="return" takes the third column as returns
    directly. Single-bar price days carry no return and are dropped.
    """
    if value not in ("price", "return"):
        raise DataError(f"intraday value column must be 'price' or 'return', got {value!r}")
    expected = ["date", "time", value]
    rows: list[tuple[Date, Time, float]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        got = [h.strip().lower() for h in header[:3]] if header else None
        if got != expected:
            raise DataError(f"{path}:1: expected header {','.join(expected)!r}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3:
                raise DataError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            d = _parse_date(row[0], path, lineno)
            t = _parse_time(row[1], path, lineno)
            x = _parse_float(row[2], path, lineno, value)
            if value == "price" and x <= 0.0:
                raise DataError(f"{path}:{lineno}: non-positive price {x}")
            rows.append((d, t, x))
    if not rows:
        raise DataError(f"{path}: no data rows")
    rows.sort(key=lambda r: (r[0], r[1]))

    days: list[tuple[Date, np.ndarray]] = []
    i = 0
    while i < len(rows):
        j = i
        while j < len(rows) and rows[j][0] == rows[i][0]:
            j += 1
        vals = np.array([r[2] for r in rows[i:j]])
        if value == "price":
            if return_kind == "log":
                rets = np.log(vals[1:] / vals[:-1])
            elif return_kind == "simple":
                rets = vals[1:] / vals[:-1] - 1.0
            else:
                raise DataError(f"unknown return kind {return_kind!r}")
        else:
            rets = vals
        if len(rets):
            days.append((rows[i][0], rets))
        i = j
    if not days:
        raise DataError(f"{path}: no usable intraday days")
    return IntradayPanel(tuple(days))


def write_rows(path, header: list[str], rows) -> None:
    """Write a UTF-8 CSV with the given header; floats use repr precision."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def write_dated_series(path, series: DatedSeries, value_name: str) -> None:
    write_rows(path, ["date", value_name],
               ((d.isoformat(), repr(float(v)))
                for d, v in zip(series.dates, series.values)))
