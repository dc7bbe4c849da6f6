"""Generalized Pareto tail mathematics.

Sign convention (package-wide): tail fitting operates on losses
L = -return >= 0, so a negative return threshold c maps to the loss
threshold u = -c, and exceedances are excesses x = L - u > 0. VaR comes
out in loss units; negate for the return-space curve.

The MLE itself lives in the kernel backend (compiled when available);
this module owns validation, the parameter containers, and the analytic
CDF / density / quantile formulas.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dynevt import _kernels as _k
from dynevt.errors import FitError

__all__ = [
    "GpdParams",
    "TailFit",
    "MIN_EXCEEDANCES",
    "gpd_cdf",
    "gpd_pdf",
    "fit_gpd_mle",
    "evt_var",
    "sample_gpd",
]

MIN_EXCEEDANCES = 10          # below this the MLE is unstable
XI_BOUNDS = (-0.5, 1.5)       # fitting box for the shape parameter
_XI_EPS = _k.XI_ZERO_EPS


@dataclass(frozen=True)
class GpdParams:
    """Shape xi, scale sigma > 0, and the loss-space threshold u."""

    xi: float
    sigma: float
    u: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise FitError(f"GPD scale must be positive, got {self.sigma}")

    @property
    def support_upper(self) -> float:
        """Upper excess bound; finite only for xi < 0."""
        if self.xi < -_XI_EPS:
            return -self.sigma / self.xi
        return np.inf


@dataclass(frozen=True)
class TailFit:
    """A fitted tail plus the exceedance bookkeeping the VaR formula needs."""

    params: GpdParams
    n: int
    n_u: int
    loglik: float

    def __post_init__(self):
        if not 0 < self.n_u <= self.n:
            raise FitError(f"need 0 < n_u <= n, got n_u={self.n_u}, n={self.n}")
        if not np.isfinite(self.loglik):
            raise FitError(f"non-finite log-likelihood {self.loglik}")

    CSV_FIELDS = ("xi", "sigma", "u", "n", "n_u", "loglik")

    def csv_row(self) -> tuple:
        """One flat row per fit, matching CSV_FIELDS."""
        return (repr(self.params.xi), repr(self.params.sigma),
                repr(self.params.u), self.n, self.n_u, repr(self.loglik))


def gpd_cdf(x, params: GpdParams):
    """GPD distribution function of the excess x >= 0 over the threshold.

    Returns exactly 1 beyond the finite support when xi < 0; the
    exponential branch is used for |xi| < 1e-9.
    """
    x = np.asarray(x, dtype=np.float64)
    z = x / params.sigma
    if abs(params.xi) < _XI_EPS:
        out = -np.expm1(-z)
    else:
        arg = 1.0 + params.xi * z
        out = np.where(arg > 0.0, 1.0 - np.power(np.maximum(arg, 1e-300),
                                                 -1.0 / params.xi), 1.0)
    out = np.where(x < 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def gpd_pdf(x, params: GpdParams):
    """GPD density of the excess x; zero outside the support."""
    x = np.asarray(x, dtype=np.float64)
    z = x / params.sigma
    if abs(params.xi) < _XI_EPS:
        out = np.exp(-z) / params.sigma
    else:
        arg = 1.0 + params.xi * z
        out = np.where(arg > 0.0,
                       np.power(np.maximum(arg, 1e-300),
                                -1.0 / params.xi - 1.0) / params.sigma,
                       0.0)
    out = np.where(x < 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def fit_gpd_mle(excesses, u: float = 0.0, n: int | None = None,
                min_exceedances: int = MIN_EXCEEDANCES,
                xi_bounds: tuple[float, float] = XI_BOUNDS) -> TailFit:
    """Maximum-likelihood GPD fit to non-negative excesses over u.

    `n` is the ambient sample size the exceedances were drawn from
    (defaults to the exceedance count itself); it only feeds the VaR
    formula, not the fit. The search is a bounded profile-likelihood scan
    seeded from moment estimates; the result is invariant (xi fixed,
    sigma scaled) under positive rescaling of the inputs.
    """
    y = np.asarray(excesses, dtype=np.float64)
    n_u = len(y)
    if n_u < min_exceedances:
        raise FitError(
            f"only {n_u} exceedances (< {min_exceedances}); widen the window "
            "or move the threshold toward zero")
    if np.min(y) < 0.0:
        raise FitError("excesses must be non-negative")
    if np.max(y) <= 0.0:
        raise FitError("degenerate sample: all excesses are zero")
    xi, sigma, loglik = _k.fit_gpd(y, xi_bounds[0], xi_bounds[1])
    if not (np.isfinite(loglik) and sigma > 0.0):
        raise FitError("GPD fit did not converge",
                       diagnostics={"xi": xi, "sigma": sigma, "loglik": loglik})
    total = n_u if n is None else int(n)
    return TailFit(GpdParams(xi, sigma, u), total, n_u, loglik)


def evt_var(fit: TailFit, p: float) -> float:
    """Peaks-over-threshold VaR (loss units) at confidence p.

    u + sigma/xi * [ ((n/n_u)(1-p))^(-xi) - 1 ], with the xi -> 0
    exponential limit u + sigma * ln(n_u / (n (1-p))).
    """
    if not 0.0 < p < 1.0:
        raise FitError(f"confidence level must be in (0, 1), got {p}")
    if fit.n_u <= 0:
        raise FitError("no exceedances above the threshold")
    return float(_k.evt_var(fit.params.u, fit.params.xi, fit.params.sigma,
                            fit.n, fit.n_u, p))


def sample_gpd(params: GpdParams, count: int, seed) -> np.ndarray:
    """Inverse-CDF excess sample; deterministic for a fixed seed."""
    if count <= 0:
        raise ValueError("count must be positive")
    rng = np.random.default_rng(seed)
    tail = 1.0 - rng.random(count)      # in (0, 1]
    if abs(params.xi) < _XI_EPS:
        return -params.sigma * np.log(tail)
    return params.sigma / params.xi * (tail ** -params.xi - 1.0)
