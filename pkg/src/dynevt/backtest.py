"""VaR model validation and predictive-ability statistics.

Kupiec's unconditional coverage and Christoffersen's conditional coverage
validate one model at a time; the Diebold-Mariano sign test compares two
models' forecast-error series. A violation is a day whose realized return
falls below the negative of the forecast VaR loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date as Date

import numpy as np

from dynevt.brt import BrtTarget, historical_forward_var
from dynevt.errors import AlignmentError, DataError
from dynevt.special import chi2_sf, norm_cdf, norm_ppf
from dynevt.timeseries import DatedSeries, ReturnSeries

__all__ = [
    "ViolationSeries",
    "TestResult",
    "violations",
    "kupiec_test",
    "christoffersen_test",
    "diebold_mariano",
    "forecast_errors",
    "validation_table",
    "dm_matrix",
    "ONE_SIDED_5PCT_CRITICAL",
]

# one-sided 5% normal critical value used to read the DM matrix
ONE_SIDED_5PCT_CRITICAL = norm_ppf(0.95)


@dataclass(frozen=True)
class ViolationSeries:
    """Dated violation indicators plus the first-order transition counts."""

    dates: tuple[Date, ...]
    violated: tuple[bool, ...]
    n00: int
    n01: int
    n10: int
    n11: int

    def __post_init__(self):
        T = len(self.violated)
        if len(self.dates) != T:
            raise DataError("dates and indicators differ in length")
        if self.n00 + self.n01 + self.n10 + self.n11 != max(T - 1, 0):
            raise DataError("transition counts must sum to T - 1")

    @property
    def T(self) -> int:
        return len(self.violated)

    @property
    def x(self) -> int:
        return int(sum(self.violated))


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    dist: str
    reject_at_5pct: bool

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise DataError(f"p-value {self.p_value} outside [0, 1]")


def violations(returns: ReturnSeries, var_series: DatedSeries) -> ViolationSeries:
    """Mark violation days (r_t < -VaR_t) and count state transitions."""
    rmap = dict(zip(returns.dates, returns.values.tolist()))
    missing = [d for d in var_series.dates if d not in rmap]
    if missing:
        raise AlignmentError(
            f"{len(missing)} VaR dates missing from the return series, "
            f"first {missing[0]}")
    r = np.array([rmap[d] for d in var_series.dates])
    viol = r < -var_series.values
    prev, cur = viol[:-1], viol[1:]
    return ViolationSeries(
        var_series.dates, tuple(bool(v) for v in viol),
        int(np.sum(~prev & ~cur)), int(np.sum(~prev & cur)),
        int(np.sum(prev & ~cur)), int(np.sum(prev & cur)))


def _xlogy(x: float, y: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(y)


def kupiec_test(x: int, T: int, p: float) -> TestResult:
    """Unconditional coverage likelihood ratio.

    `p` is the expected violation rate (1 - confidence). The statistic is
    -2 log of the ratio of the null likelihood (rate p) to the realized-rate
    likelihood, chi-square(1) under the null; x = 0 and x = T use the
    0 * log 0 := 0 limit.
    """
    if not 0 <= x <= T or T <= 0:
        raise DataError(f"need 0 <= x <= T, got x={x}, T={T}")
    if not 0.0 < p < 1.0:
        raise DataError(f"violation rate must be in (0, 1), got {p}")
    phat = x / T
    ll_null = _xlogy(T - x, 1.0 - p) + _xlogy(x, p)
    ll_alt = _xlogy(T - x, 1.0 - phat) + _xlogy(x, phat)
    lr = max(2.0 * (ll_alt - ll_null), 0.0)
    pv = chi2_sf(lr, 1)
    return TestResult(lr, pv, "chi2(1)", pv < 0.05)


def christoffersen_test(v: ViolationSeries, p: float) -> TestResult:
    """Conditional coverage: independence component plus the Kupiec LR.

    When the violation probability is identical after violation and
    non-violation days the independence component vanishes exactly and
    the statistic reduces to Kupiec's. Chi-square(2) under the null.
    """
    if v.T < 2:
        raise DataError("need at least 2 observations for transitions")
    n00, n01, n10, n11 = v.n00, v.n01, v.n10, v.n11
    total = n00 + n01 + n10 + n11
    pi = (n01 + n11) / total
    pi0 = n01 / (n00 + n01) if n00 + n01 > 0 else 0.0
    pi1 = n11 / (n10 + n11) if n10 + n11 > 0 else 0.0
    ll_null = _xlogy(n00 + n10, 1.0 - pi) + _xlogy(n01 + n11, pi)
    ll_alt = (_xlogy(n00, 1.0 - pi0) + _xlogy(n01, pi0)
              + _xlogy(n10, 1.0 - pi1) + _xlogy(n11, pi1))
    lr_ind = max(2.0 * (ll_alt - ll_null), 0.0)
    lr_cc = lr_ind + kupiec_test(v.x, v.T, p).statistic
    pv = chi2_sf(lr_cc, 2)
    return TestResult(lr_cc, pv, "chi2(2)", pv < 0.05)


def _binom_cdf(k: int, n: int, q: float = 0.5) -> float:
    return sum(math.comb(n, i) * q ** i * (1.0 - q) ** (n - i)
               for i in range(0, k + 1))


def diebold_mariano(loss_a, loss_b, exact: bool | None = None) -> TestResult:
    """Sign test on the squared-error differential of two forecasts.

    Inputs are aligned error series; the differential is d_t = a_t^2 -
    b_t^2 and the statistic counts strictly positive d_t (ties count as
    non-positive, so identical inputs give the documented degenerate
    -sqrt(T)). Large samples use the normal form (S2 - T/2) / sqrt(T/4);
    below 30 observations (or with exact=True) the binomial(T, 1/2) form
    is used. Two-sided p-values.
    """
    a = np.asarray(loss_a, dtype=np.float64)
    b = np.asarray(loss_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise AlignmentError(f"loss series shapes differ: {a.shape} vs {b.shape}")
    T = len(a)
    if T == 0:
        raise DataError("empty loss series")
    d = a * a - b * b
    s2 = int(np.sum(d > 0.0))
    s2a = (s2 - 0.5 * T) / math.sqrt(0.25 * T)
    if exact or (exact is None and T < 30):
        lo = _binom_cdf(s2, T)
        hi = 1.0 - (_binom_cdf(s2 - 1, T) if s2 > 0 else 0.0)
        pv = min(1.0, 2.0 * min(lo, hi))
        return TestResult(s2a, pv, f"binomial({T}, 0.5)", pv < 0.05)
    pv = 2.0 * (1.0 - norm_cdf(abs(s2a)))
    return TestResult(s2a, pv, "normal", pv < 0.05)


def forecast_errors(var_series: DatedSeries, returns: ReturnSeries,
                    target: BrtTarget = BrtTarget.next_day(),
                    p: float = 0.95) -> DatedSeries:
    """Forecast-error series e_t fed to the Diebold-Mariano comparison.

    Next-day target: e_t = var_return_t - r_{t+1}. Forward target:
    e_t compares against the realized forward-window historical-VaR
    return at confidence p. Trailing dates that lack the required future
    data are dropped.
    """
    index = {d: i for i, d in enumerate(returns.dates)}
    missing = [d for d in var_series.dates if d not in index]
    if missing:
        raise AlignmentError(
            f"{len(missing)} VaR dates missing from the return series, "
            f"first {missing[0]}")
    horizon = target.effective_horizon
    dates, errs = [], []
    for d, var_loss in zip(var_series.dates, var_series.values):
        i = index[d]
        if i + horizon >= len(returns):
            continue
        if target.kind == "nextday":
            realized = float(returns.values[i + 1])
        else:
            realized = -historical_forward_var(returns, i, horizon, p)
        dates.append(d)
        errs.append(-float(var_loss) - realized)
    if not dates:
        raise DataError("no VaR dates have the required future returns")
    return DatedSeries(tuple(dates), np.array(errs))


def validation_table(models: dict[str, DatedSeries], returns: ReturnSeries,
                     p: float) -> list[dict]:
    """Kupiec and Christoffersen results per model (violation rate 1-p)."""
    rows = []
    for name, series in models.items():
        v = violations(returns, series)
        kup = kupiec_test(v.x, v.T, 1.0 - p)
        chr_ = christoffersen_test(v, 1.0 - p)
        rows.append({
            "model": name, "T": v.T, "violations": v.x,
            "violation_rate": v.x / v.T if v.T else float("nan"),
            "lr_uc": kup.statistic, "p_uc": kup.p_value,
            "reject_uc": kup.reject_at_5pct,
            "lr_cc": chr_.statistic, "p_cc": chr_.p_value,
            "reject_cc": chr_.reject_at_5pct,
        })
    return rows


def dm_matrix(errors: dict[str, DatedSeries]):
    """Pairwise DM statistics over the models' common dates.

    Returns (names, stat_matrix, pvalue_matrix); entry (i, j) compares
    model i against model j, negative meaning i's squared errors are
    smaller more often than not.
    """
    names = list(errors)
    if not names:
        raise DataError("no models to compare")
    common = set(errors[names[0]].dates)
    for name in names[1:]:
        common &= set(errors[name].dates)
    if not common:
        raise AlignmentError("models share no common forecast dates")
    order = sorted(common)
    aligned = {}
    for name in names:
        lookup = errors[name].as_dict()
        aligned[name] = np.array([lookup[d] for d in order])
    k = len(names)
    stats = np.zeros((k, k))
    pvals = np.ones((k, k))
    for i in range(k):
        for j in range(k):
            res = diebold_mariano(aligned[names[i]], aligned[names[j]])
            stats[i, j] = res.statistic
            pvals[i, j] = res.p_value
    return names, stats, pvals
