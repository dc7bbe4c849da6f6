"""Shared synthetic-data builders for the test suite."""

from datetime import date, timedelta

import numpy as np
import pytest

from dynevt.timeseries import IntradayPanel, ReturnSeries


def weekday_calendar(n, start=date(2000, 1, 3)):
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += timedelta(days=1)
    return tuple(out)


def make_returns(values, start=date(2000, 1, 3)) -> ReturnSeries:
    values = np.asarray(values, dtype=np.float64)
    return ReturnSeries(weekday_calendar(len(values), start), values)


def garch_t_path(n, seed, alpha0=1e-5, alpha1=0.05, beta1=0.85, dof=6.0):
    """Simulate GARCH(1,1) with standardized t innovations.

    Returns (returns, conditional_variances); ground truth for coverage
    and recovery tests.
    """
    rng = np.random.default_rng(seed)
    z = rng.standard_t(dof, n) / np.sqrt(dof / (dof - 2.0))
    s2 = np.empty(n)
    x = np.empty(n)
    s2[0] = alpha0 / (1.0 - alpha1 - beta1)
    for t in range(n):
        if t > 0:
            s2[t] = alpha0 + alpha1 * x[t - 1] ** 2 + beta1 * s2[t - 1]
        x[t] = np.sqrt(s2[t]) * z[t]
    return x, s2


def intraday_panel_for(dates, day_sigmas, seed=99, bars=26) -> IntradayPanel:
    """One intraday day per date, bars drawn at the given daily sigma."""
    rng = np.random.default_rng(seed)
    sig = np.asarray(day_sigmas, dtype=np.float64)
    days = tuple((d, rng.normal(0.0, sig[i] / np.sqrt(bars), bars))
                 for i, d in enumerate(dates))
    return IntradayPanel(days)


@pytest.fixture(scope="session")
def iid_returns_600():
    rng = np.random.default_rng(123)
    return make_returns(rng.standard_normal(600) * 0.01)
