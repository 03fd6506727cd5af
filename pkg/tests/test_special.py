import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pradequacy import special
from pradequacy.errors import DomainError

from oracles import chi2_cdf as mp_chi2_cdf, f_cdf as mp_f_cdf
from oracles import norm_cdf as mp_norm_cdf, t_cdf as mp_t_cdf


class TestNormal:
    def test_known_values(self):
        assert special.std_normal_cdf(0.0) == 0.5
        assert special.std_normal_quantile(0.5) == 0.0
        assert special.std_normal_quantile(0.975) == pytest.approx(1.959963984540054, abs=1e-14)

    def test_tails(self):
        assert special.std_normal_cdf(-40.0) == 0.0
        assert special.std_normal_sf(10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, math.nan])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            special.std_normal_quantile(p)

    def test_vectorized_matches_scalar(self):
        p = np.linspace(1e-12, 1 - 1e-12, 501)
        vec = special.normal_quantile_array(p)
        sca = np.array([special.std_normal_quantile(v) for v in p])
        assert np.max(np.abs(vec - sca)) < 1e-9

    @pytest.mark.parametrize("x", [-8.0, -3.3, -0.7, 0.0, 1.25, 4.0])
    def test_against_quadrature(self, x):
        assert special.std_normal_cdf(x) == pytest.approx(float(mp_norm_cdf(x)), abs=1e-14)


class TestChiSquare:
    @pytest.mark.parametrize("k,x", [(1, 0.5), (2, 2.0), (3, 7.81), (10, 3.0), (30, 50.0),
                                     (2.5, 1.7), (100, 120.0)])
    def test_against_quadrature(self, k, x):
        assert special.chi_square_cdf(x, k) == pytest.approx(float(mp_chi2_cdf(x, k)), abs=1e-12)

    def test_df2_closed_form(self):
        for x in (0.1, 1.0, 5.0, 20.0):
            assert special.chi_square_sf(x, 2) == pytest.approx(math.exp(-x / 2), rel=1e-13)

    def test_zero_and_negative(self):
        assert special.chi_square_cdf(0.0, 3) == 0.0
        with pytest.raises(DomainError):
            special.chi_square_sf(-1.0, 3)
        with pytest.raises(DomainError):
            special.f_cdf(-0.5, 2, 3)

    def test_domain(self):
        with pytest.raises(DomainError):
            special.chi_square_cdf(1.0, 0.5)
        with pytest.raises(DomainError):
            special.chi_square_cdf(math.inf, 2)


class TestStudentT:
    def test_cauchy(self):
        for x in (-3.0, 0.2, 10.0):
            assert special.student_t_cdf(x, 1) == pytest.approx(0.5 + math.atan(x) / math.pi,
                                                                abs=1e-14)

    @pytest.mark.parametrize("nu,x", [(2, 1.5), (5, -2.57), (26, 2.056), (3.5, 0.4)])
    def test_against_quadrature(self, nu, x):
        assert special.student_t_cdf(x, nu) == pytest.approx(float(mp_t_cdf(x, nu)), abs=1e-12)

    def test_large_df_approaches_normal(self):
        for x in (-2.0, 0.5, 1.96):
            assert abs(special.student_t_cdf(x, 1e6) - special.std_normal_cdf(x)) < 1e-6

    def test_symmetry(self):
        assert special.student_t_sf(1.3, 7) == pytest.approx(special.student_t_cdf(-1.3, 7),
                                                             abs=1e-16)


class TestF:
    @pytest.mark.parametrize("d1,d2,x", [(1, 10, 4.96), (2, 96, 3.09), (5, 5, 0.3),
                                         (3, 1, 8.0), (10, 40, 1.2)])
    def test_against_quadrature(self, d1, d2, x):
        assert special.f_cdf(x, d1, d2) == pytest.approx(float(mp_f_cdf(x, d1, d2)), abs=1e-12)

    def test_t_square_relation(self):
        # F(1, d) is the square of t(d)
        for t in (0.5, 2.0, 3.7):
            assert special.f_sf(t * t, 1, 12) == pytest.approx(2 * special.student_t_sf(t, 12),
                                                               rel=1e-12)


class TestIncomplete:
    def test_gamma_tails_sum(self):
        for a, x in [(0.5, 0.1), (3.0, 2.0), (50.0, 55.0), (200.0, 180.0)]:
            p, q = special.gammainc(a, x)
            assert p + q == pytest.approx(1.0, abs=1e-14)
            assert p == pytest.approx(float(mp.gammainc(a, 0, x, regularized=True)), abs=1e-13)

    def test_beta_symmetry_and_oracle(self):
        for a, b, x in [(0.5, 0.5, 0.3), (2.0, 5.0, 0.2), (30.0, 0.5, 0.97)]:
            i, c = special.betainc(a, b, x)
            assert i == pytest.approx(float(mp.betainc(a, b, 0, x, regularized=True)), abs=1e-13)
            j, _ = special.betainc(b, a, 1 - x)
            assert i + j == pytest.approx(1.0, abs=1e-13)

    def test_domains(self):
        with pytest.raises(DomainError):
            special.gammainc(-1.0, 2.0)
        with pytest.raises(DomainError):
            special.betainc(1.0, 2.0, 1.5)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-12, 1 - 1e-12))
def test_quantile_round_trip(p):
    assert abs(special.std_normal_cdf(special.std_normal_quantile(p)) - p) <= 1e-8 * max(p, 1e-8) + 1e-16


@settings(max_examples=200, deadline=None)
@given(st.floats(-30, 30), st.floats(1, 500))
def test_cdf_sf_complement(x, df):
    assert special.student_t_cdf(x, df) + special.student_t_sf(x, df) == pytest.approx(1, abs=1e-14)
    ax = abs(x)
    assert special.chi_square_cdf(ax, df) + special.chi_square_sf(ax, df) == pytest.approx(1, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 50), st.floats(0, 50), st.floats(1, 60), st.floats(1, 60))
def test_f_cdf_monotone(x1, x2, d1, d2):
    lo, hi = sorted((x1, x2))
    assert special.f_cdf(lo, d1, d2) <= special.f_cdf(hi, d1, d2) + 1e-15
