import math

import numpy as np
import pytest
import scipy.special as sps
import scipy.stats as st

from dynevt.special import (betainc, chi2_sf, gammainc_lower, gammainc_upper,
                            norm_cdf, norm_ppf, t_cdf, t_ppf)


def series_gammainc_lower(a, x, terms=400):
    """Independent pure-series oracle for the regularized lower gamma."""
    if x == 0.0:
        return 0.0
    total = 0.0
    log_term = a * math.log(x) - x - math.lgamma(a + 1.0)
    term = math.exp(log_term)
    for n in range(terms):
        total += term
        term *= x / (a + n + 1.0)
    return total


class TestNormal:
    def test_cdf_against_scipy(self):
        grid = np.linspace(-8.0, 8.0, 321)
        for x in grid:
            assert norm_cdf(x) == pytest.approx(st.norm.cdf(x), abs=1e-12)

    def test_ppf_against_scipy(self):
        for q in np.concatenate([np.linspace(1e-6, 1 - 1e-6, 201),
                                 [1e-9, 1 - 1e-9]]):
            assert norm_ppf(q) == pytest.approx(st.norm.ppf(q), abs=1e-9)

    def test_ppf_named_value(self):
        assert norm_ppf(0.95) == pytest.approx(1.6448536269514722, abs=1e-9)

    def test_round_trip(self):
        for q in (0.001, 0.05, 0.5, 0.95, 0.999):
            assert norm_cdf(norm_ppf(q)) == pytest.approx(q, abs=1e-12)

    def test_ppf_domain(self):
        with pytest.raises(ValueError):
            norm_ppf(0.0)
        with pytest.raises(ValueError):
            norm_ppf(1.0)


class TestIncompleteGamma:
    def test_against_scipy(self):
        for a in (0.5, 1.0, 2.5, 10.0, 50.0):
            for x in (0.0, 0.1, 1.0, 5.0, 25.0, 120.0):
                assert gammainc_lower(a, x) == pytest.approx(
                    sps.gammainc(a, x), abs=1e-12)
                assert gammainc_upper(a, x) == pytest.approx(
                    sps.gammaincc(a, x), abs=1e-12)

    def test_against_series_oracle(self):
        for a in (0.5, 1.0, 3.0):
            for x in np.linspace(0.05, 30.0, 50):
                assert gammainc_lower(a, x) == pytest.approx(
                    series_gammainc_lower(a, x), abs=1e-10)

    def test_complementarity(self):
        for a in (0.5, 2.0, 7.0):
            for x in (0.3, 2.0, 9.0):
                assert gammainc_lower(a, x) + gammainc_upper(a, x) == \
                    pytest.approx(1.0, abs=1e-13)

    def test_domain(self):
        with pytest.raises(ValueError):
            gammainc_lower(0.0, 1.0)
        with pytest.raises(ValueError):
            gammainc_lower(1.0, -1.0)


class TestChi2:
    def test_survival_against_scipy_grid(self):
        for k in (1, 2, 5):
            for x in np.linspace(0.01, 40.0, 50):
                assert chi2_sf(x, k) == pytest.approx(
                    st.chi2.sf(x, k), abs=1e-10)

    def test_edges(self):
        assert chi2_sf(0.0, 1) == 1.0
        assert chi2_sf(-1.0, 2) == 1.0


class TestBetaAndStudentT:
    def test_betainc_against_scipy(self):
        for a in (0.5, 1.0, 3.0, 10.0):
            for b in (0.5, 2.0, 8.0):
                for x in np.linspace(0.01, 0.99, 25):
                    assert betainc(a, b, x) == pytest.approx(
                        sps.betainc(a, b, x), abs=1e-11)

    def test_t_cdf_against_scipy(self):
        for dof in (3.0, 6.0, 12.5, 30.0):
            for x in np.linspace(-6.0, 6.0, 49):
                assert t_cdf(x, dof) == pytest.approx(
                    st.t.cdf(x, dof), abs=1e-11)

    def test_t_ppf_against_scipy(self):
        for dof in (3.0, 6.0, 25.0):
            for q in (0.01, 0.05, 0.25, 0.5, 0.9, 0.99):
                assert t_ppf(q, dof) == pytest.approx(
                    st.t.ppf(q, dof), abs=1e-8)

    def test_t_round_trip(self):
        for dof in (4.0, 9.0):
            for q in (0.02, 0.4, 0.97):
                assert t_cdf(t_ppf(q, dof), dof) == pytest.approx(q, abs=1e-10)
