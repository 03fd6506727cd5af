"""Misspecification (M-S) testing and the statistical-adequacy verdict.

Each test probes one assumption of the fitted model against departures that
lie outside the model itself.  The battery runs the tests registered for the
model's assumption list and declares the model statistically adequate when
none of them rejects.

Default test forms
------------------
============================  ===============================================
Normality                      D'Agostino-Pearson K2 skewness-kurtosis omnibus,
                               ChiSquare(2).  ``method="jarque_bera"`` gives
                               ``n (S^2/6 + (K-3)^2/24)`` instead.
Independence                   Ljung-Box portmanteau on residual
                               autocorrelations, ChiSquare(m - fitted lags).
LinearityOfConditionalMean     RESET-type F test adding squared and cubed
                               (standardized) fitted values.
Homoskedasticity               Auxiliary regression of ``|e|`` on regressors,
                               squares and cross-products, F null
                               (``method="white"``: ``e^2`` and ``n R^2``
                               against ChiSquare(q)).
ParameterTInvariance           Split-sample parameter-constancy F test.
============================  ===============================================

The fixed battery is a bounded probe of the alternatives; passing it does not
exhaust every way the model could be wrong.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import special
from .catalog import Assumption, ModelKind, assumption_list
from .dataset import DataTable, VariableRoles, split_rows
from .errors import (DegenerateResidualsError, NotApplicableError, PRError,
                     PreconditionError, RankDeficiencyError)
from .estimation import RANK_TOL, FitResult, design_matrix, least_squares
from .reduction import build_conditioning, conditioned_roles
from .results import NullDistribution, TestResult

DEFAULT_ALPHA = 0.01
DEFAULT_SPLIT = 0.5
# Residual spread below this fraction of the response spread counts as a perfect fit.
DEGENERATE_TOL = 1e-10

BATTERY_CAVEAT = ("fixed battery: a bounded probe of departures from the model, "
                  "not an exhaustive search of all alternatives")


def default_lags(n: int) -> int:
    """Portmanteau lag count ``min(10, round(ln n))``, at least 1."""
    return max(1, min(10, round(math.log(n)))) if n > 1 else 1


def _moments(e: np.ndarray) -> tuple[float, float, float]:
    c = e - e.mean()
    m2 = float(np.mean(c * c))
    if not m2 > 0.0 or math.sqrt(m2) <= 1e-14 * float(np.max(np.abs(e))):
        raise DegenerateResidualsError("degenerate residuals: no variation")
    m3 = float(np.mean(c ** 3))
    m4 = float(np.mean(c ** 4))
    return m2, m3 / m2 ** 1.5, m4 / m2 ** 2


def _skewness_z(skew: float, n: int) -> float:
    y = skew * math.sqrt((n + 1) * (n + 3) / (6.0 * (n - 2)))
    beta2 = (3.0 * (n * n + 27 * n - 70) * (n + 1) * (n + 3)
             / ((n - 2.0) * (n + 5) * (n + 7) * (n + 9)))
    w2 = -1.0 + math.sqrt(2.0 * (beta2 - 1.0))
    delta = 1.0 / math.sqrt(0.5 * math.log(w2))
    alpha = math.sqrt(2.0 / (w2 - 1.0))
    ya = y / alpha
    return delta * math.log(ya + math.sqrt(ya * ya + 1.0))


def _kurtosis_z(kurt: float, n: int) -> float:
    mean = 3.0 * (n - 1) / (n + 1)
    var = 24.0 * n * (n - 2) * (n - 3) / ((n + 1.0) ** 2 * (n + 3) * (n + 5))
    x = (kurt - mean) / math.sqrt(var)
    sqrt_beta1 = (6.0 * (n * n - 5 * n + 2) / ((n + 7.0) * (n + 9))
                  * math.sqrt(6.0 * (n + 3) * (n + 5) / (n * (n - 2.0) * (n - 3))))
    a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + math.sqrt(1.0 + 4.0 / sqrt_beta1 ** 2))
    denom = 1.0 + x * math.sqrt(2.0 / (a - 4.0))
    if denom == 0.0:
        raise DegenerateResidualsError("kurtosis transform undefined")
    term2 = math.copysign(abs((1.0 - 2.0 / a) / denom) ** (1.0 / 3.0), denom)
    return ((1.0 - 2.0 / (9.0 * a)) - term2) / math.sqrt(2.0 / (9.0 * a))


def test_normality(residuals, alpha: float = 0.05, method: str = "dagostino") -> TestResult:
    """Skewness-kurtosis omnibus test of residual Normality.

    Parameters
    ----------
    residuals : array_like
        At least 8 values.
    method : {"dagostino", "jarque_bera"}
        ``dagostino`` sums the squared normalizing transforms of sample
        skewness and kurtosis; ``jarque_bera`` uses the raw moments,
        ``n (S^2/6 + (K-3)^2/24)``.  Both are referred to ChiSquare(2);
        moments divide by n.
    """
    e = np.asarray(residuals, dtype=float).ravel()
    n = e.size
    if n < 8:
        raise PreconditionError(f"normality test needs n >= 8, got {n}")
    _, skew, kurt = _moments(e)
    details: dict[str, Any] = {"skewness": skew, "kurtosis": kurt}
    if method == "jarque_bera":
        stat = n * (skew ** 2 / 6.0 + (kurt - 3.0) ** 2 / 24.0)
        label = "Jarque-Bera"
    elif method == "dagostino":
        zs, zk = _skewness_z(skew, n), _kurtosis_z(kurt, n)
        stat = zs * zs + zk * zk
        details.update(z_skewness=zs, z_kurtosis=zk)
        label = "D'Agostino-Pearson K2"
    else:
        raise ValueError(f"unknown normality method {method!r}")
    return TestResult.from_statistic("normality", stat, NullDistribution("chi2", (2,)), alpha,
                                     method=label, details=details)


def autocorrelations(e: np.ndarray, max_lag: int) -> np.ndarray:
    c = e - e.mean()
    denom = float(c @ c)
    if denom <= 0.0:
        raise DegenerateResidualsError("degenerate residuals: no variation")
    return np.array([float(c[j:] @ c[:-j]) / denom for j in range(1, max_lag + 1)])


def test_independence(residuals, lags: int | None = None, alpha: float = 0.05,
                      time_ordered: bool = True, fitted_lags: int = 0) -> TestResult:
    """Ljung-Box portmanteau ``n(n+2) sum_j rho_j^2 / (n - j)``.

    ``fitted_lags`` (the AR order when testing autoregression residuals) is
    subtracted from the degrees of freedom.
    """
    if not time_ordered:
        raise PreconditionError("independence test requires time-ordered residuals")
    e = np.asarray(residuals, dtype=float).ravel()
    n = e.size
    m = default_lags(n) if lags is None else int(lags)
    if fitted_lags and lags is None:
        m = max(m, fitted_lags + 1)
    if m < 1:
        raise PreconditionError("lags must be >= 1")
    if n <= m + 2:
        raise PreconditionError(f"independence test with {m} lags needs n > {m + 2}, got {n}")
    df = m - fitted_lags
    if df < 1:
        raise PreconditionError(f"{m} lags leave no degrees of freedom after {fitted_lags} "
                                "fitted lags")
    rho = autocorrelations(e, m)
    stat = n * (n + 2.0) * float(np.sum(rho ** 2 / (n - np.arange(1, m + 1))))
    return TestResult.from_statistic(
        "independence", stat, NullDistribution("chi2", (df,)), alpha, method="Ljung-Box",
        details={"lags": m, "fitted_lags": fitted_lags, "rho1": float(rho[0])})


def _regressor_names(fit: FitResult) -> list[str]:
    return list(fit.names[1:])


def _full_rank_additions(base: np.ndarray, candidates: Sequence[np.ndarray],
                         names: Sequence[str]) -> tuple[list[int], list[str]]:
    """Greedily keep candidate columns that are not collinear with what is already kept."""
    kept: list[int] = []
    dropped: list[str] = []
    current = base
    for i, col in enumerate(candidates):
        trial = np.column_stack([current, col])
        norms = np.linalg.norm(trial, axis=0)
        if norms[-1] == 0.0:
            dropped.append(names[i])
            continue
        r = np.linalg.qr(trial / norms, mode="r")
        pivots = np.abs(np.diag(r))
        if pivots[-1] < RANK_TOL * pivots.max() or trial.shape[0] <= trial.shape[1]:
            dropped.append(names[i])
            continue
        kept.append(i)
        current = trial
    return kept, dropped


def _check_residual_variation(fit: FitResult) -> None:
    y = fit.fitted + fit.residuals
    scale = max(float(np.std(y)), float(np.mean(np.abs(y))), np.finfo(float).tiny)
    if float(np.sqrt(np.mean(fit.residuals ** 2))) <= DEGENERATE_TOL * scale:
        raise DegenerateResidualsError("degenerate residuals: the fit is (numerically) exact")


def test_linearity(fit: FitResult, table: DataTable, alpha: float = 0.05) -> TestResult:
    """RESET-type test: F test of squared and cubed fitted values added to the design.

    Fitted values are standardized before taking powers; this leaves the
    augmented column space, hence the statistic, unchanged.
    """
    f = fit.fitted
    sd = float(np.std(f))
    if not sd > 1e-14 * max(1.0, float(np.max(np.abs(f)))):
        raise PreconditionError("fitted values are constant; linearity test undefined")
    _check_residual_variation(fit)
    X = design_matrix(table, _regressor_names(fit))
    y = fit.fitted + fit.residuals
    z = (f - f.mean()) / sd
    kept, dropped = _full_rank_additions(X, [z ** 2, z ** 3], ["fitted^2", "fitted^3"])
    if not kept:
        raise NotApplicableError("powers of fitted values are collinear with the design")
    aug = np.column_stack([X] + [[z ** 2, z ** 3][i] for i in kept])
    ssr_r = float(fit.residuals @ fit.residuals)
    ssr_u = least_squares(aug, y).ssr
    n, k = X.shape
    q = len(kept)
    df2 = n - k - q
    if df2 < 1:
        raise PreconditionError("too few observations for the linearity test")
    if ssr_u <= 0.0:
        raise DegenerateResidualsError("augmented regression fits exactly")
    stat = ((ssr_r - ssr_u) / q) / (ssr_u / df2)
    return TestResult.from_statistic("linearity", stat, NullDistribution("F", (q, df2)), alpha,
                                     method="RESET (fitted^2, fitted^3)",
                                     details={"dropped_terms": dropped})


def _variance_terms(table: DataTable, regressors: Sequence[str]) -> tuple[list[np.ndarray], list[str]]:
    cols, names = [], []
    data = {x: table.column(x) for x in regressors}
    for x in regressors:
        cols.append(data[x])
        names.append(x)
    for x in regressors:
        cols.append(data[x] ** 2)
        names.append(f"{x}^2")
    for i, a in enumerate(regressors):
        for b in regressors[i + 1:]:
            cols.append(data[a] * data[b])
            names.append(f"{a}*{b}")
    return cols, names


def test_homoskedasticity(fit: FitResult, table: DataTable, alpha: float = 0.05,
                          method: str = "glejser") -> TestResult:
    """Auxiliary-regression test of constant conditional variance.

    The auxiliary regressors are the model regressors, their squares and
    pairwise cross-products; terms collinear with earlier ones are dropped
    and listed in ``details["dropped_terms"]``.

    ``method="glejser"`` regresses ``|e|`` and uses the regression F test,
    F(q, n - q - 1).  ``method="white"`` regresses ``e^2`` and refers
    ``n R^2`` to ChiSquare(q).
    """
    regressors = _regressor_names(fit)
    if not regressors:
        raise NotApplicableError("no regressors to modulate the variance")
    n, k = fit.n, fit.k
    if n <= 2 * k + 2:
        raise PreconditionError(f"homoskedasticity test needs n > {2 * k + 2}, got {n}")
    _check_residual_variation(fit)
    cols, names = _variance_terms(table, regressors)
    ones = np.ones((n, 1))
    kept, dropped = _full_rank_additions(ones, cols, names)
    if not kept:
        raise NotApplicableError("all auxiliary terms are collinear")
    Z = np.column_stack([ones] + [cols[i] for i in kept])
    q = len(kept)
    e = fit.residuals
    if method == "glejser":
        dep = np.abs(e)
    elif method == "white":
        dep = e ** 2
    else:
        raise ValueError(f"unknown homoskedasticity method {method!r}")
    centered = dep - dep.mean()
    sst = float(centered @ centered)
    if sst <= 0.0:
        raise DegenerateResidualsError("auxiliary dependent variable is constant")
    aux = least_squares(Z, dep)
    r2 = max(0.0, 1.0 - aux.ssr / sst)
    details = {"dropped_terms": dropped, "terms": [names[i] for i in kept], "aux_r_squared": r2}
    if method == "white":
        return TestResult.from_statistic("homoskedasticity", n * r2,
                                         NullDistribution("chi2", (q,)), alpha,
                                         method="White n*R^2", details=details)
    df2 = n - q - 1
    if aux.ssr <= 0.0:
        raise DegenerateResidualsError("auxiliary regression fits exactly")
    stat = ((sst - aux.ssr) / q) / (aux.ssr / df2)
    return TestResult.from_statistic("homoskedasticity", stat, NullDistribution("F", (q, df2)),
                                     alpha, method="Glejser |e| auxiliary F", details=details)


def _ssr(table: DataTable, roles: VariableRoles) -> float:
    X = design_matrix(table, roles.regressors)
    return least_squares(X, table.column(roles.response),
                         ("const", *roles.regressors)).ssr


def test_t_invariance(table: DataTable, roles: VariableRoles, split: float = DEFAULT_SPLIT,
                      alpha: float = 0.05) -> TestResult:
    """Parameter-constancy F test across the two sub-samples of a row split.

    ``[(SSR_pooled - SSR_1 - SSR_2)/k] / [(SSR_1 + SSR_2)/(n - 2k)]`` with
    F(k, n - 2k), k counting the intercept.
    """
    roles.validate(table)
    first, second = split_rows(table, split)
    k = len(roles.regressors) + 1
    for part in (first, second):
        if part.n <= k:
            raise PreconditionError(f"sub-sample of {part.n} rows cannot identify {k} parameters")
    try:
        ssr1, ssr2 = _ssr(first, roles), _ssr(second, roles)
    except RankDeficiencyError as exc:
        raise RankDeficiencyError(f"sub-sample design: {exc}", column=exc.column) from None
    pooled = _ssr(table, roles)
    within = ssr1 + ssr2
    n = table.n
    y = table.column(roles.response)
    y_scale = max(float(np.std(y)), float(np.mean(np.abs(y))), np.finfo(float).tiny)
    if np.sqrt(pooled / n) <= DEGENERATE_TOL * y_scale:
        raise DegenerateResidualsError("degenerate residuals: the fit is (numerically) exact")
    if within <= DEGENERATE_TOL ** 2 * pooled or within <= 0.0:
        raise DegenerateResidualsError("sub-sample fits are exact; t-invariance F undefined")
    stat = ((pooled - within) / k) / (within / (n - 2 * k))
    return TestResult.from_statistic(
        "t_invariance", stat, NullDistribution("F", (k, n - 2 * k)), alpha,
        method="split-sample F", details={"split": split, "n1": first.n, "n2": second.n})


for _f in (test_normality, test_independence, test_linearity, test_homoskedasticity,
           test_t_invariance):
    _f.__test__ = False  # keep pytest from collecting library functions


# ---------------------------------------------------------------------------
# Battery
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BatteryEntry:
    assumption: Assumption
    result: TestResult | None
    note: str = ""

    @property
    def applicable(self) -> bool:
        return self.result is not None

    @property
    def reject(self) -> bool:
        return self.result is not None and self.result.reject


@dataclass(frozen=True)
class MisSpecReport:
    """Per-assumption results and the overall adequacy verdict."""

    alpha: float
    model: str
    entries: tuple[BatteryEntry, ...]
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def adequate(self) -> bool:
        return not any(e.reject for e in self.entries)

    @property
    def rejected(self) -> list[Assumption]:
        return [e.assumption for e in self.entries if e.reject]

    def entry(self, assumption: Assumption) -> BatteryEntry:
        for e in self.entries:
            if e.assumption is assumption:
                return e
        raise KeyError(assumption)

    def to_dict(self) -> dict[str, Any]:
        tests = []
        for e in self.entries:
            row: dict[str, Any] = {"assumption": e.assumption.value, "applicable": e.applicable}
            if e.result is None:
                row.update(name=e.assumption.value, method="", statistic=None, df=[],
                           null_distribution=None, p_value=None, reject=False)
            else:
                row.update(e.result.to_dict())
            row["note"] = e.note
            tests.append(row)
        return {"alpha": self.alpha, "model": self.model, "tests": tests,
                "adequate": self.adequate, "metadata": self.metadata}

    def render_text(self) -> str:
        head = f"{'Assumption':<28} {'Method':<28} {'Statistic':>12} {'Null':>12} {'p-value':>10}  Verdict"
        lines = [f"Misspecification battery for {self.model} (alpha = {self.alpha:g})",
                 head, "-" * len(head)]
        for e in self.entries:
            if e.result is None:
                lines.append(f"{e.assumption.value:<28} {'-':<28} {'-':>12} {'-':>12} {'-':>10}  "
                             f"not applicable: {e.note}")
                continue
            r = e.result
            verdict = "REJECT" if r.reject else "pass"
            lines.append(f"{e.assumption.value:<28} {r.method:<28} {r.statistic:>12.6g} "
                         f"{r.null.label:>12} {r.p_value:>10.4g}  {verdict}")
        lines.append("-" * len(head))
        lines.append("Verdict: " + ("statistically ADEQUATE" if self.adequate
                                    else "statistically INADEQUATE (" +
                                    ", ".join(a.value for a in self.rejected) + ")"))
        lines.append(f"Note: {BATTERY_CAVEAT}.")
        return "\n".join(lines)


def _working_table(fit: FitResult, table: DataTable) -> tuple[DataTable, VariableRoles]:
    model = fit.model
    if model.kind is ModelKind.AUTOREGRESSIVE:
        design = build_conditioning(table, model.roles, model.order)
        return design, conditioned_roles(design)
    return table, model.roles


def run_battery(fit: FitResult, table: DataTable, alpha: float = DEFAULT_ALPHA,
                lags: int | None = None, split: float = DEFAULT_SPLIT,
                normality_method: str = "dagostino",
                homoskedasticity_method: str = "glejser") -> MisSpecReport:
    """Run every test in the model's assumption list against ``fit``.

    A test that cannot be applied is recorded as not applicable with the
    reason; the battery raises only if no test applies.  ``fit`` is not
    modified.
    """
    if not 0.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}")
    work, roles = _working_table(fit, table)
    if work.n != fit.n:
        raise PreconditionError(f"fit uses {fit.n} rows but the table provides {work.n}")
    model = fit.model
    fitted_lags = model.order if model.kind is ModelKind.AUTOREGRESSIVE else 0

    def normality() -> TestResult:
        _check_residual_variation(fit)
        return test_normality(fit.residuals, alpha, normality_method)

    def independence() -> TestResult:
        _check_residual_variation(fit)
        return test_independence(fit.residuals, lags, alpha, time_ordered=work.time_ordered,
                                 fitted_lags=fitted_lags)

    runners = {
        Assumption.NORMALITY: normality,
        Assumption.INDEPENDENCE: independence,
        Assumption.LINEARITY: lambda: test_linearity(fit, work, alpha),
        Assumption.HOMOSKEDASTICITY: lambda: test_homoskedasticity(fit, work, alpha,
                                                                   homoskedasticity_method),
        Assumption.T_INVARIANCE: lambda: test_t_invariance(work, roles, split, alpha),
    }
    entries = []
    for assumption in assumption_list(model):
        try:
            entries.append(BatteryEntry(assumption, runners[assumption]()))
        except (PRError, ArithmeticError) as exc:
            entries.append(BatteryEntry(assumption, None, str(exc)))
    if not any(e.applicable for e in entries):
        raise NotApplicableError("no misspecification test is applicable: "
                                 + "; ".join(f"{e.assumption.value}: {e.note}" for e in entries))
    metadata = {
        "normality_method": normality_method,
        "homoskedasticity_method": homoskedasticity_method,
        "portmanteau_lags": "default min(10, round(ln n))" if lags is None else lags,
        "portmanteau_df_adjustment": fitted_lags,
        "split": split,
        "caveat": BATTERY_CAVEAT,
    }
    return MisSpecReport(alpha, model.describe(), tuple(entries), metadata)


# ---------------------------------------------------------------------------
# Plot-data export
# ---------------------------------------------------------------------------


def standardize(series: np.ndarray) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    sd = float(np.std(x))
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if sd <= 1e-14 * max(1.0, peak):
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def tplot_rows(series) -> list[dict[str, float]]:
    """Rows of t-plot and P-P/Q-Q data.

    Columns: ``index``, ``value``, ``standardized`` (t-plot), and the sorted
    standardized value ``qq_sample`` against the normal quantile
    ``qq_theoretical`` at plotting position ``(i - 0.5)/n``, with
    ``pp_theoretical`` (that position) against ``pp_empirical = Phi(qq_sample)``.
    """
    x = np.asarray(series, dtype=float).ravel()
    z = standardize(x)
    order = np.sort(z)
    n = x.size
    rows = []
    for i in range(n):
        pos = (i + 0.5) / n
        rows.append({
            "index": i + 1,
            "value": float(x[i]),
            "standardized": float(z[i]),
            "qq_sample": float(order[i]),
            "qq_theoretical": special.std_normal_quantile(pos),
            "pp_theoretical": pos,
            "pp_empirical": special.std_normal_cdf(float(order[i])),
        })
    return rows


def export_tplot(series, path: str | Path) -> Path:
    """Write :func:`tplot_rows` as CSV for external plotting."""
    path = Path(path)
    rows = tplot_rows(series)
    fields = ["index", "value", "standardized", "qq_sample", "qq_theoretical",
              "pp_theoretical", "pp_empirical"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for r in rows:
            writer.writerow([r["index"]] + [format(r[f], ".17g") for f in fields[1:]])
    return path
