"""Threshold regression and the rolling VaR forecast pipeline.

Per 600-day training window: extract realized break-even thresholds on
the regression span, regress them on lagged rolling variance and the
prior month's ambiguity, predict the threshold just past the window,
refit the tail there, and hold the resulting VaR fixed over the 25-day
forecast block. Nothing dated after the window's end ever feeds a
forecast inside the block (no look-ahead).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from datetime import date as Date

import numpy as np

from dynevt.ambiguity import ambiguity_series, build_bins, prev_month
from dynevt.brt import BrtSeries, BrtTarget, realized_brt
from dynevt.errors import BrtSearchError, DataError, FitError
from dynevt.gpd import MIN_EXCEEDANCES, TailFit, evt_var, fit_gpd_mle
from dynevt.timeseries import (DatedSeries, IntradayPanel, ReturnSeries,
                               WindowSpec, rolling_variance, slice_window)

__all__ = [
    "RegressionFit",
    "VarForecast",
    "BRT_CLAMP",
    "fit_brt_regression",
    "predict_brt",
    "uncertain_evt_var",
    "pipeline_window_starts",
    "run_pipeline",
]

log = logging.getLogger(__name__)

BRT_CLAMP = -1e-6    # a non-negative predicted threshold is pulled here
MIN_REGRESSION_ROWS = 30


@dataclass(frozen=True)
class RegressionFit:
    """OLS fit of threshold ~ intercept + variance + ambiguity."""

    beta0: float
    beta1: float
    beta2: float
    stderrs: tuple[float, float, float]
    r_squared: float
    n_obs: int

    def __post_init__(self):
        if self.n_obs <= 3:
            raise FitError("regression needs more than 3 observations")


@dataclass(frozen=True)
class VarForecast:
    """One forecast day: predicted threshold, refit tail, and its VaR."""

    date: Date
    brt_hat: float
    var_loss: float
    var_return: float
    gpd: TailFit
    flags: tuple[str, ...] = ()


def fit_brt_regression(brt: BrtSeries, variance: DatedSeries,
                       ambiguity: DatedSeries,
                       min_obs: int = MIN_REGRESSION_ROWS) -> RegressionFit:
    """OLS of realized thresholds on lagged variance and lagged ambiguity.

    The three series are joined on the threshold dates; dates missing a
    regressor are dropped. `variance` and `ambiguity` must already be
    lagged, i.e. their value dated t is the regressor for the threshold
    at t.
    """
    vmap = variance.as_dict()
    amap = ambiguity.as_dict()
    rows = [(pt.brt, vmap[pt.date], amap[pt.date])
            for pt in brt.points if pt.date in vmap and pt.date in amap]
    if len(rows) < min_obs:
        raise FitError(f"only {len(rows)} aligned regression rows (< {min_obs})")
    arr = np.asarray(rows)
    yv, v, a = arr[:, 0], arr[:, 1], arr[:, 2]
    for name, col in (("variance", v), ("ambiguity", a)):
        if np.ptp(col) == 0.0:
            raise FitError(f"regressor {name!r} is constant; design matrix "
                           "is rank-deficient")
    X = np.column_stack([np.ones(len(yv)), v, a])
    if np.linalg.matrix_rank(X) < 3:
        raise FitError("design matrix is rank-deficient (collinear regressors)")
    beta, _, _, _ = np.linalg.lstsq(X, yv, rcond=None)
    resid = yv - X @ beta
    rss = float(resid @ resid)
    dof = len(yv) - 3
    cov = np.linalg.inv(X.T @ X) * (rss / dof)
    stderrs = tuple(float(s) for s in np.sqrt(np.diag(cov)))
    tss = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0.0 else 1.0
    return RegressionFit(float(beta[0]), float(beta[1]), float(beta[2]),
                         stderrs, r2, len(yv))


def predict_brt(fit: RegressionFit, variance_t: float,
                ambiguity_t: float) -> float:
    """Linear prediction, clamped strictly negative at BRT_CLAMP."""
    raw = fit.beta0 + fit.beta1 * variance_t + fit.beta2 * ambiguity_t
    if not np.isfinite(raw):
        raise FitError(f"non-finite threshold prediction {raw}")
    return float(raw) if raw < 0.0 else BRT_CLAMP


def uncertain_evt_var(returns: ReturnSeries, brt_hat: float, p: float,
                      date: Date | None = None, evt_len: int = 100,
                      min_exceedances: int = MIN_EXCEEDANCES) -> VarForecast:
    """VaR from a tail refit at the predicted threshold.

    Fits the GPD to the strict exceedances below brt_hat within the last
    evt_len returns of `returns` (which must end at the information
    boundary). If fewer than min_exceedances returns fall below the
    predicted threshold, the threshold is relaxed toward zero to the
    nearest realized negative return that achieves the minimum, and the
    forecast is flagged "relaxed".
    """
    if brt_hat >= 0.0:
        raise FitError(f"threshold must be negative, got {brt_hat}")
    if len(returns) < evt_len:
        raise DataError(f"need {evt_len} trailing returns, have {len(returns)}")
    w = returns.values[-evt_len:]
    u = -brt_hat
    flags: tuple[str, ...] = ()
    n_u = int(np.sum(w < brt_hat))
    if n_u < min_exceedances:
        neg = w[w < 0.0]
        cand = np.unique(-neg)
        counts = np.array([int(np.sum(w < -c)) for c in cand])
        feasible = cand[counts >= min_exceedances]
        if feasible.size == 0:
            raise FitError(
                f"no threshold in the window leaves >= {min_exceedances} "
                "exceedances; cannot refit the tail")
        u = float(feasible[-1])     # nearest admissible threshold toward zero
        flags = ("relaxed",)
    excesses = -w[w < -u] - u
    fit = fit_gpd_mle(excesses, u=u, n=evt_len,
                      min_exceedances=min_exceedances)
    var_loss = evt_var(fit, p)
    return VarForecast(date if date is not None else returns.dates[-1],
                       brt_hat, var_loss, -var_loss, fit, flags)


def pipeline_window_starts(n_obs: int, spec: WindowSpec) -> list[int]:
    """Training-window start indices: stride forecast_len, window plus
    forecast block fully inside the data."""
    last = n_obs - spec.train_len - spec.forecast_len
    if last < 0:
        return []
    return list(range(0, last + 1, spec.forecast_len))


def run_pipeline(daily: ReturnSeries, panel: IntradayPanel,
                 spec: WindowSpec = WindowSpec(),
                 target: BrtTarget = BrtTarget(), p: float = 0.95,
                 min_exceedances: int = MIN_EXCEEDANCES) -> list[VarForecast]:
    """Rolling-window forecasts over every full training window.

    Per-window failures (threshold search gaps everywhere, rank-deficient
    regression, infeasible tail refit) are logged and skipped; the
    returned forecasts are the concatenation over surviving windows.
    """
    n = len(daily)
    starts = pipeline_window_starts(n, spec)
    if not starts:
        raise DataError(
            f"need at least {spec.train_len + spec.forecast_len} daily "
            f"returns, have {n}")
    if target.effective_horizon > spec.hist_len:
        raise DataError("target horizon exceeds the reserved hist_len span")

    amb = ambiguity_series(panel, build_bins())
    amb_by_month = amb.by_month()
    if not amb_by_month:
        raise DataError(
            "no usable ambiguity months: the pipeline needs an intraday "
            "panel with at least one month of >= 2 usable days")

    rv = rolling_variance(daily, spec.lag).values

    def variance_ending(i: int) -> float | None:
        j = i - (spec.lag - 1)
        return float(rv[j]) if 0 <= j < len(rv) else None

    def amb_lagged(i: int) -> float | None:
        d = daily.dates[i]
        return amb_by_month.get(prev_month((d.year, d.month)))

    brt_cache: dict[int, object] = {}

    def brt_at(t: int):
        if t not in brt_cache:
            try:
                brt_cache[t] = realized_brt(daily, t, spec.evt_len, target, p,
                                            min_exceedances)
            except BrtSearchError as exc:
                log.warning("BRT gap at %s: %s", daily.dates[t], exc)
                brt_cache[t] = None
        return brt_cache[t]

    forecasts: list[VarForecast] = []
    for T in starts:
        pts, var_rows, amb_rows = [], [], []
        for t in range(T + spec.evt_len, T + spec.train_len - spec.hist_len):
            pt = brt_at(t)
            if pt is None:
                continue
            v = variance_ending(t - spec.lag)
            a = amb_lagged(t)
            if v is None or a is None:
                continue
            pts.append(pt)
            var_rows.append(v)
            amb_rows.append(a)
        t0 = T + spec.train_len
        try:
            fit = fit_brt_regression(
                BrtSeries(tuple(pts)),
                DatedSeries(tuple(pt.date for pt in pts), np.array(var_rows)),
                DatedSeries(tuple(pt.date for pt in pts), np.array(amb_rows)))
        except FitError as exc:
            log.warning("window %d skipped: %s", T, exc)
            continue
        v0 = variance_ending(t0 - spec.lag)
        a0 = amb_lagged(t0)
        if v0 is None or a0 is None:
            log.warning("window %d skipped: missing forecast regressors", T)
            continue
        raw = fit.beta0 + fit.beta1 * v0 + fit.beta2 * a0
        brt_hat = predict_brt(fit, v0, a0)
        clamp_flags = ("clamped",) if raw >= 0.0 else ()
        info = slice_window(daily, 0, t0)    # data through the window end only
        try:
            block = uncertain_evt_var(info, brt_hat, p, evt_len=spec.evt_len,
                                      min_exceedances=min_exceedances)
        except (FitError, DataError) as exc:
            log.warning("window %d skipped: %s", T, exc)
            continue
        flags = clamp_flags + block.flags
        for j in range(spec.forecast_len):
            forecasts.append(replace(block, date=daily.dates[t0 + j],
                                     flags=flags))
    return forecasts
