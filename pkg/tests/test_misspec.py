import math

import numpy as np
import pytest
import scipy.stats as ss

from pradequacy import misspec
from pradequacy.catalog import Assumption, ReductionAssumptions, specify_model
from pradequacy.dataset import DataTable, VariableRoles
from pradequacy.errors import DegenerateResidualsError, NotApplicableError, PreconditionError
from pradequacy.estimation import fit_model, fit_ols, fit_simple_normal
from pradequacy.misspec import (autocorrelations, default_lags, run_battery, test_homoskedasticity,
                                test_independence, test_linearity, test_normality,
                                test_t_invariance, tplot_rows)

REG = VariableRoles("y", ("x",))


def table(y, x):
    return DataTable.from_columns({"y": y, "x": x})


class TestNormality:
    def test_zero_statistic(self):
        t = math.sqrt(6 + math.sqrt(40))
        e = np.array([0, 0, 1, -1, 1, -1, t, -t])
        res = test_normality(e, method="jarque_bera")
        assert res.statistic == pytest.approx(0, abs=1e-12)
        assert res.p_value == pytest.approx(1, abs=1e-12)

    def test_k2_matches_reference(self):
        g = np.random.default_rng(9)
        for n in (20, 100, 1000):
            e = g.standard_normal(n) + 0.2 * g.standard_normal(n) ** 2
            ref = ss.normaltest(e)
            res = test_normality(e)
            assert res.statistic == pytest.approx(ref.statistic, rel=1e-10)
            assert res.p_value == pytest.approx(ref.pvalue, rel=1e-8, abs=1e-14)

    def test_jb_matches_reference(self):
        e = np.random.default_rng(2).standard_normal(300)
        ref = ss.jarque_bera(e)
        res = test_normality(e, method="jarque_bera")
        assert res.statistic == pytest.approx(ref.statistic, rel=1e-10)
        assert res.p_value == pytest.approx(ref.pvalue, rel=1e-8)

    def test_exponential_rejected(self):
        e = np.random.default_rng(3).exponential(size=200)
        assert test_normality(e).p_value < 0.01

    def test_degenerate(self):
        with pytest.raises(DegenerateResidualsError):
            test_normality(np.ones(20))


class TestIndependence:
    def test_alternating(self):
        e = np.array([1.0, -1.0] * 20)
        assert autocorrelations(e, 1)[0] < -0.9
        assert test_independence(e).p_value < 0.001

    def test_matches_reference_formula(self):
        e = np.random.default_rng(4).standard_normal(120)
        m = 6
        r = autocorrelations(e, m)
        q = 120 * 122 * np.sum(r ** 2 / (120 - np.arange(1, m + 1)))
        res = test_independence(e, lags=m)
        assert res.statistic == pytest.approx(q, rel=1e-12)
        assert res.null.df == (m,)

    def test_ar_df_adjusted(self):
        e = np.random.default_rng(4).standard_normal(120)
        assert test_independence(e, lags=6, fitted_lags=2).null.df == (4,)

    def test_not_time_ordered(self):
        with pytest.raises(PreconditionError):
            test_independence(np.random.default_rng(0).standard_normal(30), time_ordered=False)

    def test_default_lags(self):
        assert default_lags(100) == 5 and default_lags(2) == 1 and default_lags(10 ** 9) == 10


class TestLinearity:
    def test_quadratic_detected(self):
        g = np.random.default_rng(5)
        x = g.standard_normal(200)
        t = table(x ** 2 + 0.3 * g.standard_normal(200), x)
        assert test_linearity(fit_ols(t, REG), t).p_value < 0.01

    def test_exact_fit_is_degenerate(self):
        x = np.linspace(0, 1, 30)
        t = table(1 + 2 * x, x)
        with pytest.raises(DegenerateResidualsError):
            test_linearity(fit_ols(t, REG), t)


class TestHomoskedasticity:
    def test_variance_in_x_squared(self):
        g = np.random.default_rng(6)
        x = g.standard_normal(200)
        t = table(1 + x + np.abs(x) * g.standard_normal(200), x)
        assert test_homoskedasticity(fit_ols(t, REG), t).p_value < 0.01

    def test_white_variant(self):
        g = np.random.default_rng(6)
        x = g.standard_normal(200)
        t = table(1 + x + np.abs(x) * g.standard_normal(200), x)
        res = test_homoskedasticity(fit_ols(t, REG), t, method="white")
        assert res.null.family == "chi2" and res.p_value < 0.01

    def test_binary_regressor_drops_square(self):
        g = np.random.default_rng(7)
        x = (g.uniform(size=80) > 0.5).astype(float)
        t = table(x + g.standard_normal(80), x)
        res = test_homoskedasticity(fit_ols(t, REG), t)
        assert res.details["dropped_terms"]

    def test_simple_normal_not_applicable(self):
        e = np.random.default_rng(0).standard_normal(50)
        rep = run_battery(fit_simple_normal(e), DataTable.from_columns({"y": e}))
        assert len(rep.entries) == 3
        assert Assumption.HOMOSKEDASTICITY not in [x.assumption for x in rep.entries]
        t = DataTable.from_columns({"y": e})
        with pytest.raises(NotApplicableError):
            test_homoskedasticity(fit_simple_normal(e), t)


class TestTInvariance:
    def test_duplicated_halves(self):
        g = np.random.default_rng(8)
        x = g.standard_normal(25)
        y = 1 + x + g.standard_normal(25)
        t = table(np.concatenate([y, y]), np.concatenate([x, x]))
        res = test_t_invariance(t, REG)
        assert res.statistic == pytest.approx(0, abs=1e-10)
        assert res.p_value == pytest.approx(1, abs=1e-10)

    def test_intercept_shift(self):
        g = np.random.default_rng(9)
        x = g.standard_normal(200)
        y = 1 + x + g.standard_normal(200) + 5 * (np.arange(200) >= 100)
        assert test_t_invariance(table(y, x), REG).p_value < 0.01

    def test_df(self):
        g = np.random.default_rng(9)
        t = table(g.standard_normal(40), g.standard_normal(40))
        assert test_t_invariance(t, REG).null.df == (2, 36)


class TestBattery:
    def test_ar_errors_flagged(self):
        g = np.random.default_rng(10)
        x = g.standard_normal(200)
        u = np.zeros(200)
        for i in range(1, 200):
            u[i] = 0.8 * u[i - 1] + g.standard_normal()
        t = table(1 + x + u, x)
        rep = run_battery(fit_ols(t, REG), t)
        assert not rep.adequate and Assumption.INDEPENDENCE in rep.rejected

    def test_noiseless_is_not_applicable(self):
        x = np.linspace(-1, 1, 40)
        t = table(1 + x, x)
        with pytest.raises(NotApplicableError):
            run_battery(fit_ols(t, REG), t)

    def test_ar_model_battery(self):
        g = np.random.default_rng(12)
        y = np.zeros(300)
        for i in range(1, 300):
            y[i] = 0.5 * y[i - 1] + g.standard_normal()
        t = DataTable.from_columns({"y": y})
        m = specify_model(ReductionAssumptions.parse("Normal", "Markov(1)", "Stationary"),
                          VariableRoles("y"))
        rep = run_battery(fit_model(t, m), t)
        assert rep.metadata["portmanteau_df_adjustment"] == 1
        assert rep.entry(Assumption.INDEPENDENCE).result.null.df == (default_lags(299) - 1,)

    def test_render_and_dict(self):
        g = np.random.default_rng(13)
        x = g.standard_normal(60)
        t = table(x + g.standard_normal(60), x)
        rep = run_battery(fit_ols(t, REG), t)
        d = rep.to_dict()
        assert len(d["tests"]) == 5 and d["adequate"] == rep.adequate
        text = rep.render_text()
        for e in rep.entries:
            assert e.assumption.value in text
            assert f"{e.result.p_value:.4g}" in text

    def test_alpha_range(self):
        g = np.random.default_rng(13)
        x = g.standard_normal(60)
        t = table(x + g.standard_normal(60), x)
        with pytest.raises(PreconditionError):
            run_battery(fit_ols(t, REG), t, alpha=0.0)


class TestPlotData:
    def test_rows(self):
        rows = tplot_rows([1.0, 3.0, 2.0, 5.0, 4.0])
        assert len(rows) == 5

    def test_perfect_fit_zero_column(self):
        rows = tplot_rows(np.zeros(10))
        assert all(r["standardized"] == 0 for r in rows)

    def test_qq_near_diagonal(self):
        rows = tplot_rows(np.random.default_rng(14).standard_normal(1000))
        # the extreme order statistics have sd near 0.35 at this n, so only the bulk is bounded
        bulk = [abs(r["qq_sample"] - r["qq_theoretical"]) for r in rows[50:950]]
        assert max(bulk) < 0.15

    def test_export(self, tmp_path):
        path = misspec.export_tplot(np.arange(5.0), tmp_path / "t.csv")
        lines = path.read_text().splitlines()
        assert len(lines) == 6 and lines[0].startswith("index,value,standardized")
