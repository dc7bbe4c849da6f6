import math
from datetime import date

import numpy as np
import pytest

from dynevt.errors import DataError
from dynevt.timeseries import (DatedSeries, PriceSeries, ReturnSeries,
                               WindowSpec, compute_returns, empirical_quantile,
                               rolling_variance, slice_window)

from conftest import make_returns, weekday_calendar


def prices(vals):
    return PriceSeries(weekday_calendar(len(vals)), np.asarray(vals, float))


class TestComputeReturns:
    def test_flat_price_zero_return(self):
        assert compute_returns(prices([100.0, 100.0])).values.tolist() == [0.0]

    def test_simple_return_definition(self):
        out = compute_returns(prices([100.0, 110.0]), kind="simple")
        assert out.values.tolist() == pytest.approx([0.10])

    def test_log_returns_hand_computed(self):
        out = compute_returns(prices([100.0, 105.0, 99.0]), kind="log")
        assert out.values == pytest.approx(
            [math.log(1.05), math.log(99.0 / 105.0)], abs=1e-15)

    def test_dates_align_to_later_price(self):
        p = prices([100.0, 101.0, 102.0])
        out = compute_returns(p)
        assert out.dates == p.dates[1:]

    def test_non_positive_price_rejected(self):
        with pytest.raises(DataError):
            prices([100.0, -1.0])
        with pytest.raises(DataError):
            prices([100.0, 0.0])

    def test_too_short(self):
        with pytest.raises(DataError):
            compute_returns(prices([100.0]))

    def test_unknown_kind(self):
        with pytest.raises(DataError):
            compute_returns(prices([1.0, 2.0]), kind="geometric")

    def test_log_round_trip_reconstructs_prices(self):
        rng = np.random.default_rng(5)
        vals = 100.0 * np.exp(np.cumsum(rng.standard_normal(300) * 0.02))
        p = prices(vals)
        r = compute_returns(p, kind="log")
        rebuilt = vals[0] * np.exp(np.cumsum(r.values))
        assert np.allclose(rebuilt, vals[1:], rtol=1e-12, atol=0.0)


class TestRollingVariance:
    def test_constant_series_all_zero(self):
        r = make_returns([0.01] * 50)
        out = rolling_variance(r, 5)
        assert len(out) == 46
        assert np.all(out.values == 0.0)

    def test_two_point_hand_value(self):
        out = rolling_variance(make_returns([0.01, -0.01]), 2)
        # sample variance with divisor n-1
        assert out.values.tolist() == pytest.approx([0.0002])

    def test_matches_brute_force_oracle(self, iid_returns_600):
        window = 21
        out = rolling_variance(iid_returns_600, window)
        v = iid_returns_600.values
        for k in range(len(out)):
            w = v[k:k + window]
            mean = float(np.sum(w)) / window
            oracle = float(np.sum((w - mean) ** 2)) / (window - 1)
            assert out.values[k] == pytest.approx(oracle, rel=1e-12)
        assert out.dates == iid_returns_600.dates[window - 1:]

    def test_non_negative(self, iid_returns_600):
        assert np.all(rolling_variance(iid_returns_600, 21).values >= 0.0)

    def test_window_longer_than_series_empty(self):
        out = rolling_variance(make_returns([0.01, 0.02]), 5)
        assert len(out) == 0

    def test_window_below_two_rejected(self):
        with pytest.raises(DataError):
            rolling_variance(make_returns([0.01, 0.02]), 1)


def _quantile_oracle(sample, q):
    """Type-7: interpolate the sorted array at rank (n-1) q."""
    s = np.sort(np.asarray(sample, float))
    h = (len(s) - 1) * q
    lo = int(math.floor(h))
    hi = min(lo + 1, len(s) - 1)
    return float(s[lo] + (h - lo) * (s[hi] - s[lo]))


class TestEmpiricalQuantile:
    def test_median_of_symmetric_set(self):
        assert empirical_quantile([-0.03, -0.01, 0.0, 0.01, 0.03], 0.5) == 0.0

    def test_singleton(self):
        for q in (0.01, 0.5, 0.99):
            assert empirical_quantile([0.42], q) == 0.42

    def test_uniform_draws_against_sorted_oracle(self):
        rng = np.random.default_rng(7)
        sample = rng.random(1000)
        got = empirical_quantile(sample, 0.05)
        assert got == pytest.approx(_quantile_oracle(sample, 0.05), abs=1e-15)
        assert got == pytest.approx(0.05, abs=0.02)   # sampling tolerance

    def test_monotone_in_q_and_bracketed(self):
        rng = np.random.default_rng(8)
        sample = rng.standard_t(4, 400)
        qs = np.linspace(0.01, 0.99, 25)
        vals = [empirical_quantile(sample, q) for q in qs]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert sample.min() <= vals[0] and vals[-1] <= sample.max()

    def test_errors(self):
        with pytest.raises(DataError):
            empirical_quantile([], 0.5)
        with pytest.raises(DataError):
            empirical_quantile([1.0], 0.0)
        with pytest.raises(DataError):
            empirical_quantile([1.0], 1.0)


class TestSliceWindow:
    def test_identity(self, iid_returns_600):
        out = slice_window(iid_returns_600, 0, len(iid_returns_600))
        assert out.dates == iid_returns_600.dates
        assert np.array_equal(out.values, iid_returns_600.values)

    def test_empty(self, iid_returns_600):
        assert len(slice_window(iid_returns_600, 0, 0)) == 0

    def test_625_minus_600_leaves_25_held_out(self):
        r = make_returns(np.linspace(-0.01, 0.01, 625))
        train = slice_window(r, 0, 600)
        assert len(train) == 600
        assert len(r) - len(train) == 25

    def test_out_of_range(self, iid_returns_600):
        with pytest.raises(DataError):
            slice_window(iid_returns_600, 0, 601)
        with pytest.raises(DataError):
            slice_window(iid_returns_600, -1, 10)


class TestTypes:
    def test_return_series_requires_increasing_dates(self):
        d = date(2020, 1, 2)
        with pytest.raises(DataError):
            ReturnSeries((d, d), np.array([0.0, 0.1]))

    def test_return_series_rejects_non_finite(self):
        with pytest.raises(DataError):
            make_returns([0.0, np.nan])

    def test_values_read_only(self, iid_returns_600):
        with pytest.raises(ValueError):
            iid_returns_600.values[0] = 1.0

    def test_window_spec_invariants(self):
        spec = WindowSpec()
        assert spec.regression_span == 450
        with pytest.raises(DataError):
            WindowSpec(train_len=100, evt_len=60, hist_len=50)
        with pytest.raises(DataError):
            WindowSpec(lag=0)

    def test_dated_series_dict(self):
        s = DatedSeries(weekday_calendar(3), np.array([1.0, 2.0, 3.0]))
        assert s.as_dict()[s.dates[1]] == 2.0
