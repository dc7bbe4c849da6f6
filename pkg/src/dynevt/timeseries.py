"""Return-series containers, rolling statistics, and window plumbing.

Everything downstream consumes these types. All containers are frozen and
carry read-only numpy arrays; windows count trading-day observations, not
calendar spans.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import date as Date

import numpy as np

from dynevt.errors import DataError

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "DatedSeries",
    "IntradayPanel",
    "WindowSpec",
    "compute_returns",
    "rolling_variance",
    "empirical_quantile",
    "slice_window",
]


def _freeze(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError("expected a 1-D value array")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def _check_dates(dates) -> tuple[Date, ...]:
    dates = tuple(dates)
    for i in range(1, len(dates)):
        if dates[i] <= dates[i - 1]:
            raise DataError(
                f"dates must be strictly increasing; offending pair "
                f"{dates[i - 1]} -> {dates[i]} at position {i}")
    return dates


@dataclass(frozen=True)
class PriceSeries:
    """Daily closing prices, strictly increasing dates, all prices > 0."""

    dates: tuple[Date, ...]
    closes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _check_dates(self.dates))
        object.__setattr__(self, "closes", _freeze(self.closes))
        if len(self.dates) != len(self.closes):
            raise DataError("dates and closes differ in length")
        if len(self.closes) and np.min(self.closes) <= 0.0:
            bad = int(np.argmin(self.closes))
            raise DataError(
                f"non-positive price {self.closes[bad]} on {self.dates[bad]}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnSeries:
    """Daily returns (dimensionless fractions) on strictly increasing dates."""

    dates: tuple[Date, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _check_dates(self.dates))
        object.__setattr__(self, "values", _freeze(self.values))
        if len(self.dates) != len(self.values):
            raise DataError("dates and values differ in length")
        if len(self.values) and not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise DataError(f"non-finite return on {self.dates[bad]}")

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class DatedSeries:
    """Generic dated value series (rolling statistics, VaR paths, ...)."""

    dates: tuple[Date, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", _check_dates(self.dates))
        object.__setattr__(self, "values", _freeze(self.values))
        if len(self.dates) != len(self.values):
            raise DataError("dates and values differ in length")

    def __len__(self) -> int:
        return len(self.dates)

    def as_dict(self) -> dict[Date, float]:
        return dict(zip(self.dates, self.values.tolist()))


@dataclass(frozen=True)
class IntradayPanel:
    """Per-day intraday return vectors, within-day ordering preserved."""

    days: tuple[tuple[Date, np.ndarray], ...]

    def __post_init__(self):
        frozen_days = []
        for d, rets in self.days:
            arr = _freeze(rets)
            if len(arr) == 0:
                raise DataError(f"intraday day {d} is empty after cleaning")
            frozen_days.append((d, arr))
        _check_dates(d for d, _ in frozen_days)
        object.__setattr__(self, "days", tuple(frozen_days))

    def __len__(self) -> int:
        return len(self.days)


@dataclass(frozen=True)
class WindowSpec:
    """Observation-count window layout of the rolling estimation protocol.

    train_len days of history per window; within it, evt_len days feed the
    tail fit at each date and hist_len days form the forward target, so the
    usable regression span is train_len - evt_len - hist_len. Forecasts run
    forecast_len days past the window; lag is the regressor lag in days.
    """

    train_len: int = 600
    evt_len: int = 100
    hist_len: int = 50
    forecast_len: int = 25
    lag: int = 21

    def __post_init__(self):
        for name in ("train_len", "evt_len", "hist_len", "forecast_len", "lag"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        if self.evt_len + self.hist_len >= self.train_len:
            raise DataError("evt_len + hist_len must be smaller than train_len")

    @property
    def regression_span(self) -> int:
        return self.train_len - self.evt_len - self.hist_len


def compute_returns(prices: PriceSeries, kind: str = "log") -> ReturnSeries:
    """Convert a price path to returns, dated at the later price.

    kind="log" gives ln(S_t / S_{t-1}); kind="simple" gives
    (S_t - S_{t-1}) / S_{t-1}.
    """
    if len(prices) < 2:
        raise DataError("need at least two prices to compute returns")
    closes = prices.closes
    if kind == "log":
        vals = np.log(closes[1:] / closes[:-1])
    elif kind == "simple":
        vals = closes[1:] / closes[:-1] - 1.0
    else:
        raise DataError(f"unknown return kind {kind!r}")
    return ReturnSeries(prices.dates[1:], vals)


def rolling_variance(returns: ReturnSeries, window: int) -> DatedSeries:
    """Trailing unbiased sample variance over `window` observations.

    The value dated t covers the window ending at t. Dates without a full
    trailing window are omitted; a window longer than the series yields an
    empty output.
    """
    if window < 2:
        raise DataError("variance window must be at least 2")
    n = len(returns)
    if window > n:
        return DatedSeries((), np.empty(0))
    v = returns.values
    win = np.lib.stride_tricks.sliding_window_view(v, window)
    out = np.var(win, axis=1, ddof=1)
    return DatedSeries(returns.dates[window - 1:], out)


def empirical_quantile(sample, q: float) -> float:
    """Order-statistic quantile with linear interpolation between ranks."""
    arr = np.asarray(sample, dtype=np.float64)
    if arr.size == 0:
        raise DataError("cannot take a quantile of an empty sample")
    if not 0.0 < q < 1.0:
        raise DataError(f"quantile level must be in (0, 1), got {q}")
    return float(np.quantile(arr, q))


def slice_window(series, start: int, length: int):
    """Half-open contiguous slice [start, start+length) preserving dates."""
    n = len(series)
    if start < 0 or length < 0 or start + length > n:
        raise DataError(
            f"slice [{start}, {start + length}) out of range for length {n}")
    stop = start + length
    if isinstance(series, PriceSeries):
        return replace(series, dates=series.dates[start:stop],
                       closes=series.closes[start:stop])
    if isinstance(series, (ReturnSeries, DatedSeries)):
        return replace(series, dates=series.dates[start:stop],
                       values=series.values[start:stop])
    raise TypeError(f"cannot slice object of type {type(series).__name__}")
