import numpy as np
import pytest

from dynevt.brt import BrtPoint, BrtSeries, BrtTarget
from dynevt.errors import DataError, FitError
from dynevt.forecaster import (BRT_CLAMP, RegressionFit, fit_brt_regression,
                               pipeline_window_starts, predict_brt,
                               run_pipeline, uncertain_evt_var)
from dynevt.gpd import evt_var, fit_gpd_mle
from dynevt.timeseries import (DatedSeries, ReturnSeries, WindowSpec,
                               slice_window)

from conftest import (garch_t_path, intraday_panel_for, make_returns,
                      weekday_calendar)

TRUE_BETA = (-0.01, -2.0, -0.5)


def regression_fixture(seed, noise=0.0, n=100):
    rng = np.random.default_rng(seed)
    dates = weekday_calendar(n)
    v = rng.uniform(1e-5, 4e-4, n)
    a = rng.uniform(0.0, 0.1, n)
    brt = TRUE_BETA[0] + TRUE_BETA[1] * v + TRUE_BETA[2] * a
    if noise:
        brt = brt + rng.normal(0.0, noise, n)
    brt = np.minimum(brt, -1e-9)
    pts = tuple(BrtPoint(d, float(b), 0.0, 1) for d, b in zip(dates, brt))
    return (BrtSeries(pts), DatedSeries(dates, v), DatedSeries(dates, a))


class TestRegression:
    def test_noiseless_exact_recovery(self):
        brt, v, a = regression_fixture(0)
        fit = fit_brt_regression(brt, v, a)
        assert fit.beta0 == pytest.approx(TRUE_BETA[0], abs=1e-8)
        assert fit.beta1 == pytest.approx(TRUE_BETA[1], abs=1e-8)
        assert fit.beta2 == pytest.approx(TRUE_BETA[2], abs=1e-8)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-10)

    def test_noisy_recovery_within_three_stderr(self):
        hits = 0
        for seed in range(20):
            brt, v, a = regression_fixture(seed, noise=1e-4, n=200)
            fit = fit_brt_regression(brt, v, a)
            betas = (fit.beta0, fit.beta1, fit.beta2)
            if all(abs(b - t) <= 3 * se
                   for b, t, se in zip(betas, TRUE_BETA, fit.stderrs)):
                hits += 1
        assert hits >= 18

    def test_row_permutation_invariance(self):
        brt, v, a = regression_fixture(3)
        fit1 = fit_brt_regression(brt, v, a)
        # same multiset of rows attached to dates in reverse: OLS must agree
        dates = brt.dates
        pts = tuple(BrtPoint(d, float(b), 0.0, 1)
                    for d, b in zip(dates, brt.values[::-1]))
        fit2 = fit_brt_regression(BrtSeries(pts),
                                  DatedSeries(dates, v.values[::-1]),
                                  DatedSeries(dates, a.values[::-1]))
        assert fit2.beta0 == pytest.approx(fit1.beta0, rel=1e-12)
        assert fit2.beta1 == pytest.approx(fit1.beta1, rel=1e-12)
        assert fit2.beta2 == pytest.approx(fit1.beta2, rel=1e-12)

    def test_constant_regressor_named(self):
        brt, v, a = regression_fixture(4)
        const = DatedSeries(v.dates, np.full(len(v), 2e-4))
        with pytest.raises(FitError, match="variance"):
            fit_brt_regression(brt, const, a)

    def test_gap_dropping_and_min_rows(self):
        brt, v, a = regression_fixture(5, n=40)
        short_v = DatedSeries(v.dates[:20], v.values[:20])
        with pytest.raises(FitError, match="aligned"):
            fit_brt_regression(brt, short_v, a)

    def test_residual_orthogonality(self):
        brt, v, a = regression_fixture(6, noise=5e-4, n=300)
        fit = fit_brt_regression(brt, v, a)
        X = np.column_stack([np.ones(len(v)), v.values, a.values])
        resid = brt.values - X @ np.array([fit.beta0, fit.beta1, fit.beta2])
        assert np.max(np.abs(X.T @ resid)) < 1e-8 * max(1.0, np.abs(
            brt.values).sum())


class TestPredict:
    def test_intercept_only(self):
        fit = RegressionFit(-0.02, 0.0, 0.0, (1e-4,) * 3, 0.0, 100)
        assert predict_brt(fit, 123.0, 456.0) == -0.02

    def test_zero_inputs_give_intercept(self):
        fit = RegressionFit(-0.013, -2.0, -0.5, (1e-4,) * 3, 0.5, 100)
        assert predict_brt(fit, 0.0, 0.0) == -0.013

    def test_clamped_to_strictly_negative(self):
        fit = RegressionFit(0.005, -2.0, -0.5, (1e-4,) * 3, 0.5, 100)
        assert predict_brt(fit, 0.0, 0.0) == BRT_CLAMP

    def test_crisis_variance_pushes_threshold_down(self):
        fit = RegressionFit(-0.01, -2.0, -0.5, (1e-4,) * 3, 0.5, 100)
        calm = predict_brt(fit, 1e-4, 0.01)
        crisis = predict_brt(fit, 4e-4, 0.01)
        assert crisis < calm


def window_returns(seed=7, n=160):
    rng = np.random.default_rng(seed)
    return make_returns(rng.standard_t(5, n) * 0.01)


class TestUncertainEvtVar:
    def test_matches_direct_refit_exactly(self):
        r = window_returns()
        info = slice_window(r, 0, 100)
        w = info.values[-100:]
        neg = np.unique(-w[w < 0.0])
        feasible = [u for u in neg if np.sum(w < -u) >= 10]
        u = feasible[len(feasible) // 2]
        fc = uncertain_evt_var(info, -u, 0.95)
        direct = fit_gpd_mle(-w[w < -u] - u, u=u, n=100)
        assert fc.var_loss == evt_var(direct, 0.95)
        assert fc.gpd.params.xi == direct.params.xi
        assert fc.flags == ()

    def test_var_monotone_in_confidence(self):
        r = window_returns(8)
        info = slice_window(r, 0, 100)
        fc95 = uncertain_evt_var(info, -0.004, 0.95)
        fc99 = uncertain_evt_var(info, -0.004, 0.99)
        assert fc99.var_loss > fc95.var_loss

    def test_var_beyond_threshold_when_bracket_below_one(self):
        r = window_returns(9)
        info = slice_window(r, 0, 100)
        fc = uncertain_evt_var(info, -0.003, 0.95)
        n, n_u = fc.gpd.n, fc.gpd.n_u
        if (n / n_u) * 0.05 <= 1.0:
            assert fc.var_loss >= -fc.brt_hat - 1e-15
        assert fc.var_return == -fc.var_loss

    def test_relaxes_deep_threshold_with_flag(self):
        r = window_returns(10)
        info = slice_window(r, 0, 100)
        w = info.values
        deep = float(w.min()) * 2.0
        fc = uncertain_evt_var(info, deep, 0.95)
        assert fc.flags == ("relaxed",)
        assert fc.brt_hat == deep                 # requested value reported
        u = fc.gpd.params.u                       # effective threshold
        assert np.sum(w < -u) >= 10
        # nearest admissible: one candidate deeper already fails
        deeper = np.unique(-w[w < 0.0])
        deeper = deeper[deeper > u]
        if len(deeper):
            assert np.sum(w < -deeper[0]) < 10

    def test_infeasible_window_raises(self):
        vals = np.concatenate([np.full(95, 0.001),
                               np.linspace(-0.01, -0.002, 5)])
        r = make_returns(vals)
        with pytest.raises(FitError, match="exceedances"):
            uncertain_evt_var(r, -0.001, 0.95)

    def test_rejects_non_negative_threshold(self):
        with pytest.raises(FitError):
            uncertain_evt_var(window_returns(11), 0.01, 0.95)


def small_spec():
    return WindowSpec(train_len=120, evt_len=40, hist_len=20,
                      forecast_len=10, lag=21)


def small_fixture(seed=21, n=160):
    x, s2 = garch_t_path(n, seed, alpha0=1e-5, alpha1=0.06, beta1=0.86)
    daily = make_returns(x)
    panel = intraday_panel_for(daily.dates, np.sqrt(s2), seed=seed + 1)
    return daily, panel


class TestPipeline:
    def test_625_days_yield_exactly_25_forecasts(self):
        rng = np.random.default_rng(12)
        daily = make_returns(rng.standard_t(6, 625) * 0.01)
        panel = intraday_panel_for(
            daily.dates, 0.01 * (1.0 + 0.3 * np.sin(np.arange(625) / 30.0)))
        out = run_pipeline(daily, panel, WindowSpec(), BrtTarget.forward(50),
                           0.95)
        assert len(out) == 25
        assert out[0].date == daily.dates[600]
        assert out[-1].date == daily.dates[624]
        # the VaR is held fixed over the block between refits
        assert len({fc.var_loss for fc in out}) == 1
        assert len({fc.brt_hat for fc in out}) == 1

    def test_window_starts(self):
        spec = WindowSpec()
        assert pipeline_window_starts(625, spec) == [0]
        assert pipeline_window_starts(650, spec) == [0, 25]
        assert pipeline_window_starts(624, spec) == []

    def test_deterministic_rerun(self):
        daily, panel = small_fixture()
        a = run_pipeline(daily, panel, small_spec(), BrtTarget.forward(20),
                         0.95)
        b = run_pipeline(daily, panel, small_spec(), BrtTarget.forward(20),
                         0.95)
        assert [(f.date, f.brt_hat, f.var_loss) for f in a] == \
            [(f.date, f.brt_hat, f.var_loss) for f in b]

    def test_translation_invariance(self):
        daily, panel = small_fixture(22)
        shift_d = tuple(d.replace(year=d.year + 400) for d in daily.dates)
        daily2 = ReturnSeries(shift_d, daily.values)
        panel2 = type(panel)(tuple((d.replace(year=d.year + 400), r)
                                   for d, r in panel.days))
        a = run_pipeline(daily, panel, small_spec(), BrtTarget.forward(20),
                         0.95)
        b = run_pipeline(daily2, panel2, small_spec(), BrtTarget.forward(20),
                         0.95)
        assert [(f.brt_hat, f.var_loss) for f in a] == \
            [(f.brt_hat, f.var_loss) for f in b]

    def test_no_look_ahead_perturbation(self):
        daily, panel = small_fixture(23)
        base = run_pipeline(daily, panel, small_spec(), BrtTarget.forward(20),
                            0.95)
        assert base
        rng = np.random.default_rng(5)
        for _ in range(5):
            cut = base[rng.integers(0, len(base) - 1)].date
            cut_idx = daily.dates.index(cut)
            j = int(rng.integers(cut_idx + 1, len(daily)))
            vals = daily.values.copy()
            vals[j] += rng.normal(0.0, 0.05)
            daily2 = ReturnSeries(daily.dates, vals)
            out = run_pipeline(daily2, panel, small_spec(),
                               BrtTarget.forward(20), 0.95)
            kept = [(f.date, f.brt_hat, f.var_loss, f.gpd.params.xi)
                    for f in base if f.date <= cut]
            got = [(f.date, f.brt_hat, f.var_loss, f.gpd.params.xi)
                   for f in out if f.date <= cut]
            assert got == kept

    def test_requires_enough_data(self):
        daily, panel = small_fixture(24, n=100)
        with pytest.raises(DataError):
            run_pipeline(daily, panel, small_spec(), BrtTarget.forward(20),
                         0.95)

    def test_horizon_must_fit_reserved_span(self):
        daily, panel = small_fixture(25)
        with pytest.raises(DataError):
            run_pipeline(daily, panel, small_spec(), BrtTarget.forward(50),
                         0.95)

    def test_next_day_target_variant_runs(self):
        daily, panel = small_fixture(26)
        out = run_pipeline(daily, panel, small_spec(), BrtTarget.next_day(),
                           0.95)
        assert out
        assert all(fc.var_loss > 0.0 for fc in out)
