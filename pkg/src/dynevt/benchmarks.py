"""Benchmark VaR models: historical simulation, GBM Monte Carlo,
variance-covariance, GARCH, EGARCH, asymmetric CAViaR, and
fixed-percentile EVT.

Alignment convention shared by every model: the VaR dated t is a forecast
for day t computed from data strictly before t (the trailing `window`
observations ending at t-1). All VaR values are in loss units; each model
exports the same date,var_loss,var_return schema so the backtests are
model-agnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from dynevt import _kernels as _k
from dynevt.errors import DataError, FitError
from dynevt.gpd import MIN_EXCEEDANCES, evt_var, fit_gpd_mle
from dynevt.special import norm_ppf, t_ppf
from dynevt.timeseries import DatedSeries, ReturnSeries

__all__ = [
    "GarchParams",
    "GarchFit",
    "EgarchParams",
    "EgarchFit",
    "CaviarParams",
    "CaviarFit",
    "var_historical",
    "var_variance_covariance",
    "var_monte_carlo_gbm",
    "fit_garch",
    "garch_next_var",
    "fit_egarch",
    "egarch_next_var",
    "fit_caviar_asymmetric",
    "caviar_next_var",
    "var_plain_evt",
    "rolling_var",
    "BENCHMARK_MODELS",
]

BENCHMARK_MODELS = ("evt", "garch", "egarch", "caviar", "monte_carlo",
                    "historical", "var_covar")

MIN_FIT_OBS = 250
_PENALTY = 1e10
_MC_STREAM = 7919       # fixed substream tags keep per-model seeds stable
_CAVIAR_STREAM = 104729


def _values(returns) -> np.ndarray:
    if isinstance(returns, ReturnSeries):
        return returns.values
    return np.asarray(returns, dtype=np.float64)


def _forecast_windows(returns: ReturnSeries, window: int):
    n = len(returns)
    if window < 1 or window > n:
        raise DataError(f"window {window} invalid for series of length {n}")
    rows = np.lib.stride_tricks.sliding_window_view(returns.values, window)
    return returns.dates[window:], rows[:n - window]


def quantile_z(p: float, dist: str = "normal", dof: float | None = None) -> float:
    """Quantile of the standardized (unit-variance) innovation at level p."""
    if dist == "normal":
        return norm_ppf(p)
    if dist == "t":
        if dof is None or dof <= 2.0:
            raise FitError("student-t VaR needs dof > 2")
        return t_ppf(p, dof) * math.sqrt((dof - 2.0) / dof)
    raise FitError(f"unknown innovation distribution {dist!r}")


def var_historical(returns: ReturnSeries, window: int, p: float) -> DatedSeries:
    """Rolling empirical VaR: the (1-p) return quantile of the trailing
    window, in loss units."""
    dates, rows = _forecast_windows(returns, window)
    return DatedSeries(dates, -np.quantile(rows, 1.0 - p, axis=1))


def var_variance_covariance(returns: ReturnSeries, window: int,
                            p: float) -> DatedSeries:
    """Zero-mean normal VaR: z_p times the trailing sample volatility."""
    if window < 2:
        raise DataError("variance-covariance window must be at least 2")
    dates, rows = _forecast_windows(returns, window)
    return DatedSeries(dates, norm_ppf(p) * np.std(rows, axis=1, ddof=1))


def var_monte_carlo_gbm(returns: ReturnSeries, window: int, p: float,
                        n_paths: int = 10000, horizon: int = 1,
                        seed: int = 0) -> DatedSeries:
    """One-step GBM simulation VaR.

    Drift and diffusion are calibrated on the trailing window; terminal
    returns over `horizon` days are simulated and their empirical (1-p)
    quantile taken, as in historical simulation on synthetic data.
    Deterministic per (seed, date); each date draws from its own
    substream so results are stable under different date ranges.
    """
    if n_paths < 1000:
        raise DataError("need at least 1000 Monte Carlo paths")
    dates, rows = _forecast_windows(returns, window)
    m = rows.mean(axis=1)
    s = rows.std(axis=1, ddof=1)
    spread = np.ptp(rows, axis=1)
    out = np.empty(len(dates))
    for k in range(len(dates)):
        if s[k] == 0.0 or spread[k] == 0.0:
            raise FitError(f"zero volatility in the window ending before "
                           f"{dates[k]}; GBM calibration is degenerate")
        rng = np.random.default_rng([seed, _MC_STREAM, k])
        sim = m[k] * horizon + s[k] * math.sqrt(horizon) \
            * rng.standard_normal(n_paths)
        out[k] = -np.quantile(sim, 1.0 - p)
    return DatedSeries(dates, out)


# ---------------------------------------------------------------------------
# GARCH


@dataclass(frozen=True)
class GarchParams:
    alpha0: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    dist: str = "normal"
    dof: float | None = None

    def __post_init__(self):
        if self.alpha0 <= 0.0:
            raise FitError("alpha0 must be positive")
        if any(a < 0.0 for a in self.alpha) or any(b < 0.0 for b in self.beta):
            raise FitError("ARCH/GARCH coefficients must be non-negative")
        if sum(self.alpha) + sum(self.beta) >= 1.0:
            raise FitError("stationarity requires sum(alpha) + sum(beta) < 1")
        if self.dist == "t" and (self.dof is None or self.dof <= 2.0):
            raise FitError("student-t innovations need dof > 2")


@dataclass(frozen=True)
class GarchFit:
    params: GarchParams
    mean: float
    sigma2: np.ndarray       # conditional variances; last entry is the forecast
    loglik: float
    n_obs: int


def _innovation_nll(x: np.ndarray, s2: np.ndarray, dist: str,
                    dof: float) -> float:
    if np.any(s2 <= 0.0) or not np.all(np.isfinite(s2)):
        return _PENALTY
    if dist == "normal":
        val = 0.5 * np.sum(np.log(2.0 * np.pi) + np.log(s2) + x * x / s2)
    else:
        c = (math.lgamma(0.5 * (dof + 1.0)) - math.lgamma(0.5 * dof)
             - 0.5 * math.log(math.pi * (dof - 2.0)))
        val = np.sum(-c + 0.5 * np.log(s2)
                     + 0.5 * (dof + 1.0) * np.log1p(x * x / (s2 * (dof - 2.0))))
    return float(val) if np.isfinite(val) else _PENALTY


def _run_starts(objective, starts):
    best = None
    for x0 in starts:
        res = minimize(objective, np.asarray(x0, dtype=np.float64),
                       method="Nelder-Mead",
                       options={"maxiter": 4000, "xatol": 1e-10,
                                "fatol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    # polish from the overall best point
    res = minimize(objective, best.x, method="Nelder-Mead",
                   options={"maxiter": 4000, "xatol": 1e-10, "fatol": 1e-10})
    return res if res.fun <= best.fun else best


def fit_garch(returns, p_order: int = 1, q_order: int = 1,
              dist: str = "normal") -> GarchFit:
    """Quasi-MLE GARCH(p, q) fit (demeaned returns, stationarity enforced)."""
    x = _values(returns)
    T = len(x)
    if T < MIN_FIT_OBS:
        raise DataError(f"GARCH fit needs >= {MIN_FIT_OBS} observations, got {T}")
    mu = float(np.mean(x))
    x = x - mu
    init = float(np.mean(x * x))
    if init <= 0.0:
        raise FitError("constant return series; variance recursion is degenerate")
    q, pp = q_order, p_order
    fit_t = dist == "t"

    def unpack(vec):
        a0 = vec[0]
        alpha = vec[1:1 + q]
        beta = vec[1 + q:1 + q + pp]
        dof = vec[-1] if fit_t else None
        return a0, alpha, beta, dof

    def objective(vec):
        a0, alpha, beta, dof = unpack(vec)
        tot = np.sum(alpha) + np.sum(beta)
        if (a0 <= 0.0 or np.any(alpha < 0.0) or np.any(beta < 0.0)
                or tot >= 0.999):
            return _PENALTY * (1.0 + abs(min(a0, 0.0)) + max(tot - 0.999, 0.0))
        if fit_t and not 2.05 < dof < 300.0:
            return _PENALTY
        s2 = _k.garch_filter(x, float(a0), np.asarray(alpha),
                             np.asarray(beta), init)[:T]
        return _innovation_nll(x, s2, dist, dof if fit_t else 0.0)

    starts = []
    for a_tot, b_tot in ((0.05, 0.90), (0.10, 0.85), (0.02, 0.95), (0.15, 0.75)):
        vec = [init * max(1.0 - a_tot - b_tot, 0.01)]
        vec += [a_tot / q] * q + [b_tot / pp] * pp
        if fit_t:
            vec.append(8.0)
        starts.append(vec)
    res = _run_starts(objective, starts)
    if res.fun >= _PENALTY:
        raise FitError("GARCH fit stuck in the infeasible region",
                       diagnostics={"x": res.x.tolist()})
    if not res.success:
        raise FitError("GARCH optimizer did not converge",
                       diagnostics={"x": res.x.tolist(), "nll": float(res.fun),
                                    "message": res.message})
    a0, alpha, beta, dof = unpack(res.x)
    params = GarchParams(float(a0), tuple(float(a) for a in alpha),
                         tuple(float(b) for b in beta), dist,
                         float(dof) if fit_t else None)
    s2 = _k.garch_filter(x, params.alpha0, np.asarray(params.alpha),
                         np.asarray(params.beta), init)
    return GarchFit(params, mu, s2, -float(res.fun), T)


def garch_next_var(fit: GarchFit, p: float) -> float:
    """Next-day VaR (loss units) from the variance forecast."""
    sigma = math.sqrt(float(fit.sigma2[-1]))
    return quantile_z(p, fit.params.dist, fit.params.dof) * sigma


# ---------------------------------------------------------------------------
# EGARCH


@dataclass(frozen=True)
class EgarchParams:
    omega: float
    betag: tuple[float, ...]     # weights on g(Z) lags; pinned to 1 by the fit
    alpha: tuple[float, ...]     # log-variance persistence
    theta: float
    lam: float
    dist: str = "normal"
    dof: float | None = None

    def __post_init__(self):
        if sum(abs(a) for a in self.alpha) >= 1.0:
            raise FitError("log-variance stationarity requires sum|alpha| < 1")
        if self.dist == "t" and (self.dof is None or self.dof <= 2.0):
            raise FitError("student-t innovations need dof > 2")


@dataclass(frozen=True)
class EgarchFit:
    params: EgarchParams
    mean: float
    sigma2: np.ndarray
    loglik: float
    n_obs: int


def expected_abs_z(dist: str = "normal", dof: float | None = None) -> float:
    """E|Z| of the standardized innovation (sqrt(2/pi) when normal)."""
    if dist == "normal":
        return math.sqrt(2.0 / math.pi)
    if dist == "t":
        return (2.0 * math.sqrt(dof - 2.0)
                * math.exp(math.lgamma(0.5 * (dof + 1.0))
                           - math.lgamma(0.5 * dof))
                / (math.sqrt(math.pi) * (dof - 1.0)))
    raise FitError(f"unknown innovation distribution {dist!r}")


def fit_egarch(returns, p_order: int = 1, q_order: int = 1,
               dist: str = "normal") -> EgarchFit:
    """Quasi-MLE EGARCH fit on demeaned returns.

    The paper-form weights on g(Z) are not identified jointly with
    (theta, lambda), so they are pinned to one and (theta, lambda) carry
    the scale.
    """
    x = _values(returns)
    T = len(x)
    if T < MIN_FIT_OBS:
        raise DataError(f"EGARCH fit needs >= {MIN_FIT_OBS} observations, got {T}")
    mu = float(np.mean(x))
    x = x - mu
    var0 = float(np.mean(x * x))
    if var0 <= 0.0:
        raise FitError("constant return series; variance recursion is degenerate")
    ls_init = math.log(var0)
    q, pp = q_order, p_order
    fit_t = dist == "t"
    betag = np.ones(q)

    def unpack(vec):
        omega = vec[0]
        alpha = vec[1:1 + pp]
        theta, lam = vec[1 + pp], vec[2 + pp]
        dof = vec[-1] if fit_t else None
        return omega, alpha, theta, lam, dof

    def objective(vec):
        omega, alpha, theta, lam, dof = unpack(vec)
        if np.sum(np.abs(alpha)) >= 0.999:
            return _PENALTY * (1.0 + float(np.sum(np.abs(alpha))))
        if fit_t and not 2.05 < dof < 300.0:
            return _PENALTY
        ez = expected_abs_z(dist, dof)
        s2 = _k.egarch_filter(x, float(omega), betag, np.asarray(alpha),
                              float(theta), float(lam), ls_init, ez)[:T]
        return _innovation_nll(x, s2, dist, dof if fit_t else 0.0)

    starts = []
    for a1, theta0, lam0 in ((0.90, -0.10, 0.15), (0.95, 0.0, 0.10),
                             (0.70, -0.05, 0.20), (0.90, 0.10, 0.10)):
        vec = [(1.0 - a1) * ls_init] + [a1 / pp] * pp + [theta0, lam0]
        if fit_t:
            vec.append(8.0)
        starts.append(vec)
    res = _run_starts(objective, starts)
    if res.fun >= _PENALTY:
        raise FitError("EGARCH fit stuck in the infeasible region",
                       diagnostics={"x": res.x.tolist()})
    if not res.success:
        raise FitError("EGARCH optimizer did not converge",
                       diagnostics={"x": res.x.tolist(), "nll": float(res.fun),
                                    "message": res.message})
    omega, alpha, theta, lam, dof = unpack(res.x)
    params = EgarchParams(float(omega), tuple(betag.tolist()),
                          tuple(float(a) for a in alpha), float(theta),
                          float(lam), dist, float(dof) if fit_t else None)
    s2 = _k.egarch_filter(x, params.omega, betag, np.asarray(params.alpha),
                          params.theta, params.lam, ls_init,
                          expected_abs_z(dist, params.dof))
    return EgarchFit(params, mu, s2, -float(res.fun), T)


def egarch_next_var(fit: EgarchFit, p: float) -> float:
    sigma = math.sqrt(float(fit.sigma2[-1]))
    return quantile_z(p, fit.params.dist, fit.params.dof) * sigma


# ---------------------------------------------------------------------------
# CAViaR (asymmetric slope)


@dataclass(frozen=True)
class CaviarParams:
    beta1: float
    beta2: float
    beta3: float
    beta4: float

    def __post_init__(self):
        for b in (self.beta1, self.beta2, self.beta3, self.beta4):
            if not np.isfinite(b):
                raise FitError("CAViaR coefficients must be finite")


@dataclass(frozen=True)
class CaviarFit:
    params: CaviarParams
    theta: float             # quantile level of the recursion (1 - p)
    q0: float
    quantiles: np.ndarray    # return-space quantile path; last is the forecast
    loss: float
    converged: bool


def caviar_tick_loss(quantiles: np.ndarray, x: np.ndarray,
                     theta: float) -> float:
    """Mean quantile (tick) loss of a quantile path against the returns."""
    ind = (x < quantiles).astype(np.float64)
    return float(np.mean((theta - ind) * (x - quantiles)))


def fit_caviar_asymmetric(returns, p: float, seed: int = 0,
                          n_restarts: int = 10) -> CaviarFit:
    """Fit the asymmetric-slope quantile recursion by multi-start simplex.

    The recursion models the (1-p) return quantile directly; the tick
    loss is minimized over the four coefficients with deterministic plus
    seeded random restarts. The recursion is initialized at the empirical
    quantile of the first tenth of the sample. If no restart converges,
    the best iterate is returned with converged=False.
    """
    x = _values(returns)
    T = len(x)
    if T < MIN_FIT_OBS:
        raise DataError(f"CAViaR fit needs >= {MIN_FIT_OBS} observations, got {T}")
    theta = 1.0 - p
    n0 = max(1, math.ceil(0.1 * T))
    q0 = float(np.quantile(x[:n0], theta))
    q_emp = float(np.quantile(x, theta))

    def objective(vec):
        qs = _k.caviar_filter(x, float(vec[0]), float(vec[1]), float(vec[2]),
                              float(vec[3]), q0)[:T]
        val = caviar_tick_loss(qs, x, theta)
        return val if np.isfinite(val) else _PENALTY

    starts = [
        [q_emp * 0.1, 0.9, 0.0, 0.0],
        [q_emp, 0.0, 0.0, 0.0],
    ]
    rng = np.random.default_rng([seed, _CAVIAR_STREAM])
    for _ in range(n_restarts):
        b2 = rng.uniform(0.0, 1.0)
        starts.append([q_emp * (1.0 - b2) + rng.normal(0.0, 0.1 * abs(q_emp)),
                       b2, rng.normal(0.0, 0.3), rng.normal(0.0, 0.3)])
    best = None
    converged = False
    for x0 in starts:
        res = minimize(objective, np.asarray(x0, dtype=np.float64),
                       method="Nelder-Mead",
                       options={"maxiter": 2000, "xatol": 1e-10,
                                "fatol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
        converged = converged or bool(res.success)
    params = CaviarParams(*(float(b) for b in best.x))
    qs = _k.caviar_filter(x, params.beta1, params.beta2, params.beta3,
                          params.beta4, q0)
    return CaviarFit(params, theta, q0, qs, float(best.fun), converged)


def caviar_next_var(fit: CaviarFit) -> float:
    """Next-day VaR (loss units) from the fitted quantile recursion."""
    return -float(fit.quantiles[-1])


# ---------------------------------------------------------------------------
# fixed-percentile EVT


def var_plain_evt(returns: ReturnSeries, window: int, p: float,
                  threshold_percentile: float = 95.0,
                  min_exceedances: int = MIN_EXCEEDANCES) -> DatedSeries:
    """Rolling EVT VaR with the threshold pinned at a fixed percentile of
    the trailing loss distribution."""
    if window < 100:
        raise DataError("plain EVT needs a window of at least 100 days")
    dates, rows = _forecast_windows(returns, window)
    out = np.empty(len(dates))
    for k in range(len(dates)):
        losses = -rows[k]
        u = float(np.quantile(losses, threshold_percentile / 100.0))
        excesses = losses[losses > u] - u
        fit = fit_gpd_mle(excesses, u=u, n=window,
                          min_exceedances=min_exceedances)
        out[k] = evt_var(fit, p)
    return DatedSeries(dates, out)


# ---------------------------------------------------------------------------
# rolling orchestration for the fit-based models


def _rolling_fit_var(returns: ReturnSeries, model: str, window: int, p: float,
                     refit_every: int, seed: int, dist: str) -> DatedSeries:
    vals = returns.values
    n = len(returns)
    if window > n - 1:
        raise DataError(f"window {window} leaves no forecast dates (n={n})")
    out = np.empty(n - window)
    for b0 in range(window, n, refit_every):
        be = min(b0 + refit_every, n)
        a = b0 - window
        fit_slice = vals[a:b0]
        if model == "garch":
            fit = fit_garch(fit_slice, dist=dist)
            x_ext = vals[a:be] - fit.mean
            init = float(np.mean((fit_slice - fit.mean) ** 2))
            s2 = _k.garch_filter(x_ext, fit.params.alpha0,
                                 np.asarray(fit.params.alpha),
                                 np.asarray(fit.params.beta), init)
            z = quantile_z(p, dist, fit.params.dof)
            out[b0 - window:be - window] = z * np.sqrt(s2[b0 - a:be - a])
        elif model == "egarch":
            fit = fit_egarch(fit_slice, dist=dist)
            x_ext = vals[a:be] - fit.mean
            var0 = float(np.mean((fit_slice - fit.mean) ** 2))
            s2 = _k.egarch_filter(x_ext, fit.params.omega,
                                  np.asarray(fit.params.betag),
                                  np.asarray(fit.params.alpha),
                                  fit.params.theta, fit.params.lam,
                                  math.log(var0),
                                  expected_abs_z(dist, fit.params.dof))
            z = quantile_z(p, dist, fit.params.dof)
            out[b0 - window:be - window] = z * np.sqrt(s2[b0 - a:be - a])
        elif model == "caviar":
            fit = fit_caviar_asymmetric(fit_slice, p, seed=seed)
            qs = _k.caviar_filter(vals[a:be], fit.params.beta1,
                                  fit.params.beta2, fit.params.beta3,
                                  fit.params.beta4, fit.q0)
            out[b0 - window:be - window] = -qs[b0 - a:be - a]
        else:
            raise DataError(f"unknown fit-based model {model!r}")
    return DatedSeries(returns.dates[window:], out)


def rolling_var(returns: ReturnSeries, model: str, window: int = 600,
                p: float = 0.95, refit_every: int = 25, seed: int = 0,
                dist: str = "normal", n_paths: int = 10000,
                threshold_percentile: float = 95.0) -> DatedSeries:
    """Rolling daily VaR series for one named benchmark model.

    Direct models (historical, var_covar, monte_carlo, evt) recalibrate
    every day; the optimizer-based models (garch, egarch, caviar) refit
    once per `refit_every` days and update daily inside the block via
    their fitted recursions.
    """
    if model == "historical":
        return var_historical(returns, window, p)
    if model == "var_covar":
        return var_variance_covariance(returns, window, p)
    if model == "monte_carlo":
        return var_monte_carlo_gbm(returns, window, p, n_paths=n_paths,
                                   seed=seed)
    if model == "evt":
        return var_plain_evt(returns, window, p,
                             threshold_percentile=threshold_percentile)
    if model in ("garch", "egarch", "caviar"):
        return _rolling_fit_var(returns, model, window, p, refit_every, seed,
                                dist)
    raise DataError(f"unknown model {model!r}; choose from "
                    f"{', '.join(BENCHMARK_MODELS)}")
