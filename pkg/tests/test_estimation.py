import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import ols as mp_ols, random_ols_problem as random_problem
from pradequacy.dataset import DataTable, VariableRoles
from pradequacy.errors import PreconditionError, RankDeficiencyError
from pradequacy.estimation import (coefficient_t_test, fit_ar, fit_ols, fit_simple_normal,
                                   format_fit, least_squares)


def test_matches_extended_precision_oracle():
    g = np.random.default_rng(2024)
    for _ in range(20):
        X, y = random_problem(g)
        ls = least_squares(X, y)
        beta, se = mp_ols(X, y)
        np.testing.assert_allclose(ls.beta, beta, rtol=1e-8)
        s = np.sqrt(ls.ssr / (X.shape[0] - X.shape[1]))
        np.testing.assert_allclose(s * np.sqrt(np.diag(ls.xtx_inv)), se, rtol=1e-8)


def test_exact_interpolation():
    x = np.array([0.0, 1, 2, 5])
    t = DataTable.from_columns({"y": 2 + 3 * x, "x": x})
    fit = fit_ols(t, VariableRoles("y", ("x",)))
    np.testing.assert_allclose(fit.coefficients, [2, 3], atol=1e-12)
    assert fit.s == pytest.approx(0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1, abs=1e-12)


def test_constant_response():
    t = DataTable.from_columns({"y": [4.0] * 6, "x": np.arange(6.0)})
    fit = fit_ols(t, VariableRoles("y", ("x",)))
    assert fit.coefficients[1] == pytest.approx(0, abs=1e-12)
    assert fit.r_squared == 0.0


def test_rank_deficiency_names_column():
    x = np.arange(10.0)
    t = DataTable.from_columns({"y": np.sin(x), "x": x, "x2": 2 * x + 1})
    with pytest.raises(RankDeficiencyError) as exc:
        fit_ols(t, VariableRoles("y", ("x", "x2")))
    assert exc.value.column == "x2"
    assert "x2" in str(exc.value)


def test_n_not_above_k():
    t = DataTable.from_columns({"y": [1.0, 2.0], "x": [0.0, 1.0]})
    with pytest.raises(PreconditionError):
        fit_ols(t, VariableRoles("y", ("x",)))


class TestSimpleNormal:
    def test_constant(self):
        fit = fit_simple_normal([5.0, 5, 5, 5])
        assert fit.coefficients[0] == 5 and fit.sigma2 == 0

    def test_two_points(self):
        fit = fit_simple_normal([-1.0, 1.0])
        assert fit.coefficients[0] == 0 and fit.sigma2 == pytest.approx(2.0)

    def test_too_short(self):
        with pytest.raises(PreconditionError):
            fit_simple_normal([1.0])

    def test_simulated_mean(self):
        g = np.random.default_rng(11)
        fit = fit_simple_normal(3 + 2 * g.standard_normal(10_000))
        assert abs(fit.coefficients[0] - 3) < 4 * 2 / 100


class TestAR:
    def test_exact_recursion(self):
        y = 8.0 * 0.5 ** np.arange(12)
        fit = fit_ar(y, 1)
        assert fit.coefficients[1] == pytest.approx(0.5, abs=1e-10)
        assert fit.s == pytest.approx(0, abs=1e-10)

    def test_constant_series(self):
        with pytest.raises(RankDeficiencyError):
            fit_ar(np.full(20, 3.0), 1)

    def test_simulated(self):
        g = np.random.default_rng(5)
        e = g.standard_normal(5100)
        y = np.zeros_like(e)
        for t in range(1, e.size):
            y[t] = 0.7 * y[t - 1] + e[t]
        fit = fit_ar(y[100:], 1)
        assert abs(fit.coefficients[1] - 0.7) < 0.05
        assert fit.model.kind.value == "AutoRegressive"


def test_t_test_and_format():
    g = np.random.default_rng(8)
    x = g.standard_normal(50)
    t = DataTable.from_columns({"y": 1 + 0.5 * x + g.standard_normal(50), "x": x})
    fit = fit_ols(t, VariableRoles("y", ("x",)))
    res = coefficient_t_test(fit, 1, 0.5)
    assert res.null.df == (48,)
    assert 0 <= res.p_value <= 1
    text = format_fit(fit)
    assert "R^2" in text and "(" in text and "n = 50" in text


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_residuals_orthogonal_to_design(seed):
    X, y = random_problem(np.random.default_rng(seed))
    ls = least_squares(X, y)
    scale = np.linalg.norm(X, axis=0) * np.linalg.norm(y)
    assert np.all(np.abs(X.T @ ls.residuals) <= 1e-10 * scale)
