"""Monthly ambiguity from intraday return histograms.

Ambiguity is the cross-day instability of the within-day return
distribution over a month: bin the intraday returns of each day on a
fixed variable-width grid, then sum E[Pi_i] * Var[Pi_i] / (w_i (1 - w_i))
over bins, with mean and variance taken across the month's days. Two
months with identical day-to-day histograms have zero ambiguity no matter
how volatile the days themselves are; ambiguity is not risk.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from datetime import date as Date

import numpy as np

from dynevt.errors import DataError
from dynevt.timeseries import IntradayPanel

__all__ = [
    "BinScheme",
    "DailyBinProbabilities",
    "AmbiguityValue",
    "AmbiguitySeries",
    "MIN_INTRADAY_RETURNS",
    "build_bins",
    "daily_bin_probabilities",
    "bin_contributions",
    "monthly_ambiguity",
    "ambiguity_series",
    "prev_month",
]

log = logging.getLogger(__name__)

MIN_INTRADAY_RETURNS = 10    # days thinner than this are excluded
MIN_DAYS_PER_MONTH = 2       # cross-day variance needs two observations
CATCHALL_WIDTH = 0.01        # probability-scale width assigned to the open bins


@dataclass(frozen=True)
class BinScheme:
    """Histogram grid: finite edges plus two open catch-all bins.

    `edges` are the finite boundaries (return units); bin i covers
    [edges[i-1], edges[i]) half-open, bin 0 is (-inf, edges[0]) and the
    final bin is [edges[-1], +inf). `widths` has one probability-scale
    entry per bin, catch-alls included.
    """

    edges: np.ndarray
    widths: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.float64).copy()
        widths = np.asarray(self.widths, dtype=np.float64).copy()
        if np.any(np.diff(edges) <= 0.0):
            raise DataError("bin edges must be strictly increasing")
        if len(widths) != len(edges) + 1:
            raise DataError("need one width per bin (edges + 1)")
        if np.any(widths <= 0.0) or np.any(widths >= 1.0):
            raise DataError("bin widths must lie in (0, 1)")
        if not np.array_equal(edges, -edges[::-1]):
            raise DataError("bin scheme must be symmetric about zero")
        edges.setflags(write=False)
        widths.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "widths", widths)

    @property
    def n_bins(self) -> int:
        return len(self.widths)

    def bin_index(self, returns) -> np.ndarray:
        """Bin assignment; values on an edge fall into the bin to its right."""
        return np.searchsorted(self.edges, np.asarray(returns), side="right")


# band layout: (upper edge in basis points, step in basis points)
_BANDS = ((200, 10), (300, 20), (400, 25), (500, 50), (600, 100))


def build_bins() -> BinScheme:
    """The variable-width grid: 0.1% bins on [-2%, 2%], then 0.2%, 0.25%,
    0.5% and 1% bands out to +-6%, plus open catch-alls beyond."""
    pos_bp = []
    prev = 0
    for upper, step in _BANDS:
        pos_bp.extend(range(prev + step, upper + 1, step))
        prev = upper
    pos = np.array(pos_bp, dtype=np.float64) / 10000.0
    edges = np.concatenate([-pos[::-1], [0.0], pos])
    widths = np.concatenate([[CATCHALL_WIDTH], np.diff(edges), [CATCHALL_WIDTH]])
    return BinScheme(edges, widths)


@dataclass(frozen=True)
class DailyBinProbabilities:
    """One day's bin-occupancy fractions; sums to one."""

    date: Date
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        if np.any(probs < 0.0) or np.any(probs > 1.0):
            raise DataError("bin probabilities must lie in [0, 1]")
        if abs(float(np.sum(probs)) - 1.0) > 1e-12:
            raise DataError(f"bin probabilities sum to {np.sum(probs)}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class AmbiguityValue:
    month: tuple[int, int]
    mho2: float
    days_used: int

    def __post_init__(self):
        if self.mho2 < 0.0:
            raise DataError("ambiguity cannot be negative")
        if self.days_used < MIN_DAYS_PER_MONTH:
            raise DataError(f"ambiguity needs >= {MIN_DAYS_PER_MONTH} days")


@dataclass(frozen=True)
class AmbiguitySeries:
    values: tuple[AmbiguityValue, ...]

    def __post_init__(self):
        months = [v.month for v in self.values]
        if any(b <= a for a, b in zip(months, months[1:])):
            raise DataError("ambiguity months must be strictly increasing")

    def __len__(self) -> int:
        return len(self.values)

    def by_month(self) -> dict[tuple[int, int], float]:
        return {v.month: v.mho2 for v in self.values}


def prev_month(month: tuple[int, int]) -> tuple[int, int]:
    y, m = month
    return (y - 1, 12) if m == 1 else (y, m - 1)


def daily_bin_probabilities(day: Date, intraday_returns, scheme: BinScheme,
                            min_returns: int = MIN_INTRADAY_RETURNS
                            ) -> DailyBinProbabilities:
    """Occupancy fractions of one day's intraday returns on the grid."""
    arr = np.asarray(intraday_returns, dtype=np.float64)
    if arr.size < min_returns:
        raise DataError(
            f"day {day} has {arr.size} intraday returns (< {min_returns})")
    counts = np.bincount(scheme.bin_index(arr), minlength=scheme.n_bins)
    return DailyBinProbabilities(day, counts / arr.size)


def bin_contributions(days: list[DailyBinProbabilities],
                      scheme: BinScheme) -> np.ndarray:
    """Per-bin additive terms E[Pi] * Var[Pi] / (w (1 - w)).

    Variance across days uses the population convention (divide by the
    number of days).
    """
    if len(days) < MIN_DAYS_PER_MONTH:
        raise DataError(f"need >= {MIN_DAYS_PER_MONTH} days, got {len(days)}")
    pis = np.vstack([d.probs for d in days])
    if pis.shape[1] != scheme.n_bins:
        raise DataError("probability vectors do not match the bin scheme")
    mean = pis.mean(axis=0)
    var = np.mean((pis - mean) ** 2, axis=0)
    w = scheme.widths
    return mean * var / (w * (1.0 - w))


def monthly_ambiguity(days: list[DailyBinProbabilities],
                      scheme: BinScheme) -> AmbiguityValue:
    """Ambiguity of one month from its daily bin probabilities."""
    months = {(d.date.year, d.date.month) for d in days}
    if len(months) > 1:
        raise DataError(f"days span multiple months: {sorted(months)}")
    mho2 = float(np.sum(bin_contributions(days, scheme)))
    return AmbiguityValue(months.pop(), mho2, len(days))


def ambiguity_series(panel: IntradayPanel, scheme: BinScheme | None = None,
                     min_returns: int = MIN_INTRADAY_RETURNS
                     ) -> AmbiguitySeries:
    """One ambiguity value per calendar month with enough usable days.

    Days with fewer than min_returns intraday returns are excluded;
    months left with fewer than two usable days are gaps.
    """
    if scheme is None:
        scheme = build_bins()
    by_month: dict[tuple[int, int], list[DailyBinProbabilities]] = {}
    for d, rets in panel.days:
        if rets.size < min_returns:
            log.warning("ambiguity: dropping %s (%d intraday returns)",
                        d, rets.size)
            continue
        key = (d.year, d.month)
        by_month.setdefault(key, []).append(
            daily_bin_probabilities(d, rets, scheme, min_returns))
    values = []
    for key in sorted(by_month):
        days = by_month[key]
        if len(days) < MIN_DAYS_PER_MONTH:
            log.warning("ambiguity: month %s has %d usable days; gap",
                        key, len(days))
            continue
        values.append(monthly_ambiguity(days, scheme))
    return AmbiguitySeries(tuple(values))
