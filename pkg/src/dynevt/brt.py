"""Break-even risk threshold extraction.

At each date the candidate set is the realized negative returns of the
trailing tail-fit window. Each candidate is tried as the GPD threshold;
the one whose EVT VaR lands closest to a forward-looking target (the
historical VaR of the following days, or simply the next day's return)
is the realized break-even threshold for that date.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date as Date

import numpy as np

from dynevt import _kernels as _k
from dynevt.errors import BrtSearchError, DataError
from dynevt.gpd import MIN_EXCEEDANCES, XI_BOUNDS
from dynevt.timeseries import ReturnSeries, WindowSpec, empirical_quantile

__all__ = [
    "BrtTarget",
    "BrtPoint",
    "BrtSeries",
    "TIE_TOL",
    "historical_forward_var",
    "target_loss",
    "realized_brt",
    "brt_series",
]

log = logging.getLogger(__name__)

TIE_TOL = 1e-12   # objective ties within this resolve toward zero


@dataclass(frozen=True)
class BrtTarget:
    """What the EVT VaR should break even with.

    kind="forward": the historical VaR of the next `horizon` days.
    kind="nextday": the next business day's return (horizon pinned to 1).
    """

    kind: str = "forward"
    horizon: int = 50

    def __post_init__(self):
        if self.kind not in ("forward", "nextday"):
            raise DataError(f"unknown target kind {self.kind!r}")
        if self.horizon < 1:
            raise DataError("target horizon must be at least 1")

    @classmethod
    def forward(cls, horizon: int = 50) -> "BrtTarget":
        return cls("forward", horizon)

    @classmethod
    def next_day(cls) -> "BrtTarget":
        return cls("nextday", 1)

    @property
    def effective_horizon(self) -> int:
        return 1 if self.kind == "nextday" else self.horizon


@dataclass(frozen=True)
class BrtPoint:
    date: Date
    brt: float
    objective_gap: float
    candidates_searched: int

    def __post_init__(self):
        if not self.brt < 0.0:
            raise BrtSearchError(f"break-even threshold must be negative, got {self.brt}")
        if self.objective_gap < 0.0:
            raise BrtSearchError("objective gap cannot be negative")


@dataclass(frozen=True)
class BrtSeries:
    points: tuple[BrtPoint, ...]

    def __post_init__(self):
        dates = [pt.date for pt in self.points]
        if any(b <= a for a, b in zip(dates, dates[1:])):
            raise DataError("BRT points must have strictly increasing dates")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dates(self) -> tuple[Date, ...]:
        return tuple(pt.date for pt in self.points)

    @property
    def values(self) -> np.ndarray:
        return np.array([pt.brt for pt in self.points])


def historical_forward_var(returns: ReturnSeries, t: int, horizon: int,
                           p: float) -> float:
    """Empirical VaR (loss units) of the returns on (t, t+horizon]."""
    if t < 0 or t + horizon >= len(returns):
        raise DataError(
            f"forward window (t={t}, horizon={horizon}) exceeds series "
            f"length {len(returns)}")
    window = returns.values[t + 1:t + 1 + horizon]
    return -empirical_quantile(window, 1.0 - p)


def target_loss(returns: ReturnSeries, t: int, target: BrtTarget,
                p: float) -> float:
    """Loss-space break-even target for date index t."""
    if target.kind == "nextday":
        if t + 1 >= len(returns):
            raise DataError(f"no next-day return after index {t}")
        return -float(returns.values[t + 1])
    return historical_forward_var(returns, t, target.horizon, p)


def realized_brt(returns: ReturnSeries, t: int, evt_window: int = 100,
                 target: BrtTarget = BrtTarget(), p: float = 0.95,
                 min_exceedances: int = MIN_EXCEEDANCES) -> BrtPoint:
    """Break-even threshold at index t by exhaustive candidate search.

    Candidates are the deduplicated negative returns in the trailing
    evt_window; those leaving fewer than min_exceedances strict
    exceedances are skipped. Ties within TIE_TOL of the best objective
    resolve to the candidate closest to zero (largest exceedance count).
    """
    if t - evt_window + 1 < 0:
        raise DataError(f"index {t} has no full {evt_window}-day trailing window")
    tl = target_loss(returns, t, target, p)
    window = returns.values[t - evt_window + 1:t + 1]
    neg = window[window < 0.0]
    if neg.size == 0:
        raise BrtSearchError(f"no negative returns in the window ending at index {t}")
    cand_u = np.unique(-neg)          # ascending loss-space thresholds
    idx, gap, searched = _k.brt_scan(
        -window, cand_u, evt_window, tl, p, min_exceedances,
        XI_BOUNDS[0], XI_BOUNDS[1], TIE_TOL)
    if idx < 0:
        raise BrtSearchError(
            f"no candidate threshold at index {t} leaves "
            f">= {min_exceedances} exceedances")
    return BrtPoint(returns.dates[t], -float(cand_u[idx]), gap, searched)


def brt_series(returns: ReturnSeries, window: WindowSpec = WindowSpec(),
               target: BrtTarget = BrtTarget(), p: float = 0.95,
               min_exceedances: int = MIN_EXCEEDANCES,
               window_start: int = 0) -> BrtSeries:
    """Realized BRT over one training window's regression span.

    Evaluates every t in [window_start + evt_len,
    window_start + train_len - hist_len - 1]; dates where the search is
    infeasible are logged and left as gaps.
    """
    if window_start < 0 or window_start + window.train_len > len(returns):
        raise DataError(
            f"training window [{window_start}, "
            f"{window_start + window.train_len}) out of range")
    if target.effective_horizon > window.hist_len:
        raise DataError("target horizon exceeds the reserved hist_len span")
    lo = window_start + window.evt_len
    hi = window_start + window.train_len - window.hist_len   # exclusive
    points = []
    for t in range(lo, hi):
        try:
            points.append(realized_brt(returns, t, window.evt_len, target, p,
                                       min_exceedances))
        except BrtSearchError as exc:
            log.warning("BRT gap at %s: %s", returns.dates[t], exc)
    return BrtSeries(tuple(points))
