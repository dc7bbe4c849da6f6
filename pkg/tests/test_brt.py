import numpy as np
import pytest

from dynevt.brt import (TIE_TOL, BrtPoint, BrtSeries, BrtTarget, brt_series,
                        historical_forward_var, realized_brt, target_loss)
from dynevt.errors import BrtSearchError, DataError
from dynevt.gpd import evt_var, fit_gpd_mle
from dynevt.timeseries import WindowSpec, empirical_quantile

from conftest import make_returns


def brt_oracle(returns, t, evt_window, target, p, min_exc=10):
    """Exhaustive re-evaluation of every admissible candidate through the
    public fitting API, with the documented two-pass tie rule."""
    tl = target_loss(returns, t, target, p)
    w = returns.values[t - evt_window + 1:t + 1]
    losses = -w
    cands = np.unique(-w[w < 0.0])
    objs = []
    for u in cands:
        y = losses[losses > u] - u
        if len(y) < min_exc:
            objs.append(np.inf)
            continue
        fit = fit_gpd_mle(y, u=u, n=evt_window, min_exceedances=min_exc)
        objs.append(abs(evt_var(fit, p) - tl))
    objs = np.asarray(objs)
    if not np.any(np.isfinite(objs)):
        return None
    best = np.min(objs)
    for i, o in enumerate(objs):
        if o <= best + TIE_TOL:
            return -float(cands[i]), float(o)
    return None


class TestTargets:
    def test_degenerate_forward_window(self):
        r = make_returns([0.001] * 10 + [-0.02] * 50 + [0.0])
        assert historical_forward_var(r, 9, 50, 0.95) == pytest.approx(0.02)

    def test_normal_window_quantile(self):
        rng = np.random.default_rng(0)
        vals = rng.normal(0.0, 0.01, 51)
        r = make_returns(vals)
        got = historical_forward_var(r, 0, 50, 0.95)
        assert got == pytest.approx(-empirical_quantile(vals[1:], 0.05),
                                    abs=1e-15)
        assert got == pytest.approx(0.0164, abs=0.01)   # 1.645 sigma region

    def test_horizon_one_reduces_to_next_day_return(self):
        r = make_returns([0.01, -0.013, 0.002])
        assert historical_forward_var(r, 0, 1, 0.95) == pytest.approx(0.013)
        assert target_loss(r, 0, BrtTarget.next_day(), 0.95) == \
            pytest.approx(0.013)

    def test_out_of_bounds(self):
        r = make_returns([0.01] * 60)
        with pytest.raises(DataError):
            historical_forward_var(r, 20, 50, 0.95)

    def test_target_validation(self):
        with pytest.raises(DataError):
            BrtTarget("weekly")
        with pytest.raises(DataError):
            BrtTarget.forward(0)


def crisis_returns(seed=11, n=1000, shift=500, scale=2.0):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(n) * 0.01
    vals[shift:] *= scale
    return make_returns(vals)


class TestRealizedBrt:
    def test_single_admissible_candidate(self):
        # one candidate close to zero with exactly 10 strict exceedances;
        # every deeper candidate leaves fewer than 10
        deep = np.linspace(-0.03, -0.02, 10)
        vals = np.concatenate([deep, [-0.001], np.full(89, 0.005)])
        rng = np.random.default_rng(1)
        rng.shuffle(vals)
        r = make_returns(np.concatenate([vals, [-0.01] + [0.0] * 49]))
        pt = realized_brt(r, 99, 100, BrtTarget.forward(50), 0.95)
        assert pt.brt == pytest.approx(-0.001)
        assert pt.candidates_searched == 1

    def test_argmin_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(2)
        checked = 0
        for _ in range(10):
            vals = rng.standard_t(5, 160) * 0.012
            r = make_returns(vals)
            pt = realized_brt(r, 99, 100, BrtTarget.forward(50), 0.95)
            oracle = brt_oracle(r, 99, 100, BrtTarget.forward(50), 0.95)
            assert oracle is not None
            assert pt.brt == oracle[0]
            assert pt.objective_gap == oracle[1]
            checked += 1
        assert checked == 10

    def test_brt_is_a_realized_negative_return(self):
        rng = np.random.default_rng(3)
        vals = rng.standard_normal(160) * 0.01
        r = make_returns(vals)
        pt = realized_brt(r, 99, 100, BrtTarget.forward(50), 0.95)
        window = vals[0:100]
        assert pt.brt in window[window < 0.0]

    def test_subset_never_beats_full_search(self):
        from dynevt import _kernels
        rng = np.random.default_rng(4)
        w = rng.standard_t(5, 100) * 0.01
        losses = -w
        cand = np.unique(-w[w < 0.0])
        target = 0.025
        _, full_gap, _ = _kernels.brt_scan(losses, cand, 100, target, 0.95, 10)
        for _ in range(10):
            keep = rng.random(len(cand)) < 0.5
            sub = cand[keep]
            if len(sub) == 0:
                continue
            idx, gap, searched = _kernels.brt_scan(losses, sub, 100, target,
                                                   0.95, 10)
            if searched:
                assert gap >= full_gap - 1e-15

    def test_no_negative_candidates(self):
        r = make_returns(np.full(160, 0.002))
        with pytest.raises(BrtSearchError):
            realized_brt(r, 99, 100, BrtTarget.forward(50), 0.95)

    def test_crisis_regime_shifts_brt_down(self):
        r = crisis_returns()
        pre = [realized_brt(r, t, 100, BrtTarget.forward(50), 0.95).brt
               for t in range(150, 350, 10)]
        post = [realized_brt(r, t, 100, BrtTarget.forward(50), 0.95).brt
                for t in range(650, 850, 10)]
        assert np.median(post) < np.median(pre)

    def test_point_validation(self):
        with pytest.raises(BrtSearchError):
            BrtPoint(make_returns([0.0, 0.0]).dates[0], 0.01, 0.0, 3)


class TestBrtSeries:
    def test_constant_series_is_all_gaps(self):
        r = make_returns(np.full(600, 0.001))
        out = brt_series(r, WindowSpec(), BrtTarget.forward(50), 0.95)
        assert len(out) == 0

    def test_full_window_span_is_450(self):
        rng = np.random.default_rng(5)
        r = make_returns(rng.standard_normal(625) * 0.01)
        out = brt_series(r, WindowSpec(), BrtTarget.forward(50), 0.95)
        assert len(out) == 450
        assert out.dates[0] == r.dates[100]
        assert out.dates[-1] == r.dates[549]

    def test_iid_series_is_stationary(self):
        rng = np.random.default_rng(6)
        r = make_returns(rng.standard_normal(600) * 0.01)
        out = brt_series(r, WindowSpec(), BrtTarget.forward(50), 0.95)
        vals = out.values
        half = len(vals) // 2
        a, b = np.median(vals[:half]), np.median(vals[half:])
        iqr = np.quantile(vals, 0.75) - np.quantile(vals, 0.25)
        assert abs(a - b) <= iqr

    def test_window_bounds_checked(self):
        r = make_returns(np.random.default_rng(7).standard_normal(500) * 0.01)
        with pytest.raises(DataError):
            brt_series(r, WindowSpec(), BrtTarget.forward(50), 0.95)

    def test_series_type_ordering(self):
        rng = np.random.default_rng(8)
        r = make_returns(rng.standard_normal(600) * 0.01)
        out = brt_series(r, WindowSpec(), BrtTarget.next_day(), 0.95)
        assert all(a < b for a, b in zip(out.dates, out.dates[1:]))
        with pytest.raises(DataError):
            BrtSeries(tuple(reversed(out.points)))
