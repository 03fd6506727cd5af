"""Least-squares estimation of the catalog models.

Linear fits go through a Householder QR factorization of the column-scaled
design; normal equations are never formed.  A column whose scaled R pivot
falls below ``RANK_TOL`` times the largest pivot is reported as collinear
with the columns before it.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .catalog import ModelKind, ReductionAssumptions, StatisticalModel, specify_model
from .dataset import DataTable, VariableRoles
from .errors import PreconditionError, RankDeficiencyError
from .results import NullDistribution, TestResult

RANK_TOL = 1e-10


@dataclass(frozen=True)
class FitResult:
    """An estimated catalog model.

    Attributes
    ----------
    coefficients, standard_errors : ndarray
        Mean parameters, intercept first, and their OLS standard errors.
    residuals, fitted : ndarray
        ``fitted + residuals`` reproduces the response.
    r_squared : float
        ``1 - SSR/SST`` with centered SST; 0 when the response is constant.
    s : float
        Regression standard error ``sqrt(SSR / (n - k))``.
    n, k : int
        Rows used and number of mean parameters.
    names : tuple of str
        Coefficient labels (``"const"`` then regressor names).
    xtx_inv : ndarray
        ``(X'X)^{-1}``, kept for restriction tests.
    """

    model: StatisticalModel
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    r_squared: float
    s: float
    n: int
    k: int
    names: tuple[str, ...]
    ssr: float
    xtx_inv: np.ndarray = field(repr=False)

    @property
    def sigma2(self) -> float:
        return self.s ** 2

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    def cov_params(self) -> np.ndarray:
        return self.sigma2 * self.xtx_inv

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def to_dict(self) -> dict:
        return {
            "model": self.model.describe(),
            "n": self.n,
            "k": self.k,
            "coefficients": [
                {"name": nm, "estimate": float(b), "std_error": float(se)}
                for nm, b, se in zip(self.names, self.coefficients, self.standard_errors)
            ],
            "r_squared": self.r_squared,
            "s": self.s,
            "ssr": self.ssr,
        }


def design_matrix(table: DataTable, regressors: Sequence[str]) -> np.ndarray:
    """Intercept column followed by the named regressors."""
    return np.column_stack([np.ones(table.n), table.columns(list(regressors))])


@dataclass(frozen=True)
class LeastSquares:
    """Bare least-squares solution used by the fitters and the auxiliary regressions."""

    beta: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    ssr: float
    xtx_inv: np.ndarray


def least_squares(X: np.ndarray, y: np.ndarray, names: Sequence[str] | None = None) -> LeastSquares:
    """Solve ``min ||y - X b||`` by QR with scaled columns.

    Raises
    ------
    RankDeficiencyError
        When a column is numerically a combination of the preceding ones.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if n <= k:
        raise PreconditionError(f"need more observations than parameters (n={n}, k={k})")
    scale = np.linalg.norm(X, axis=0)
    labels = list(names) if names is not None else [f"column {j}" for j in range(k)]
    zero = np.flatnonzero(scale == 0.0)
    if zero.size:
        j = int(zero[0])
        raise RankDeficiencyError(f"design column {labels[j]!r} is identically zero",
                                  column=labels[j])
    Q, R = np.linalg.qr(X / scale)
    pivots = np.abs(np.diag(R))
    bad = np.flatnonzero(pivots < RANK_TOL * pivots.max())
    if bad.size:
        j = int(bad[0])
        raise RankDeficiencyError(
            f"design is rank deficient: column {labels[j]!r} is collinear with "
            f"{', '.join(repr(c) for c in labels[:j]) or 'nothing'}",
            column=labels[j])
    qty = Q.T @ y
    beta_scaled = _back_substitute(R, qty)
    beta = beta_scaled / scale
    fitted = X @ beta
    residuals = y - fitted
    r_inv = _back_substitute(R, np.eye(k))
    xtx_inv = (r_inv @ r_inv.T) / np.outer(scale, scale)
    return LeastSquares(beta, fitted, residuals, float(residuals @ residuals), xtx_inv)


def _back_substitute(R: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.linalg.solve(np.triu(R), b)


def _r_squared(y: np.ndarray, ssr: float) -> float:
    centered = y - y.mean()
    sst = float(centered @ centered)
    if sst <= 0.0:
        return 0.0
    return min(1.0, max(0.0, 1.0 - ssr / sst))


def _linear_model(roles: VariableRoles) -> StatisticalModel:
    return specify_model(ReductionAssumptions(), roles)


def fit_ols(table: DataTable, roles: VariableRoles,
            model: StatisticalModel | None = None) -> FitResult:
    """Least-squares fit of ``roles.response`` on an intercept and ``roles.regressors``."""
    roles.validate(table)
    if model is None:
        model = _linear_model(roles)
    names = ("const", *roles.regressors)
    X = design_matrix(table, roles.regressors)
    y = table.column(roles.response)
    ls = least_squares(X, y, names)
    n, k = X.shape
    s = math.sqrt(ls.ssr / (n - k))
    se = s * np.sqrt(np.diag(ls.xtx_inv))
    return FitResult(model, ls.beta, se, ls.residuals, ls.fitted, _r_squared(y, ls.ssr),
                     s, n, k, names, ls.ssr, ls.xtx_inv)


def _as_series(series) -> np.ndarray:
    if isinstance(series, DataTable):
        if len(series.names) != 1:
            raise PreconditionError("expected a single-column table")
        return series.values[:, 0].copy()
    return np.asarray(series, dtype=float).ravel()


def fit_simple_normal(series, name: str = "y") -> FitResult:
    """Estimate ``mu`` and ``sigma2`` of the simple Normal model ``X_k = mu + u_k``."""
    y = _as_series(series)
    n = y.size
    if n < 2:
        raise PreconditionError(f"simple Normal fit needs n >= 2, got {n}")
    mu = float(y.mean())
    resid = y - mu
    ssr = float(resid @ resid)
    s = math.sqrt(ssr / (n - 1))
    model = specify_model(ReductionAssumptions(), VariableRoles(name))
    return FitResult(model, np.array([mu]), np.array([s / math.sqrt(n)]), resid,
                     np.full(n, mu), 0.0, s, n, 1, ("const",), ssr, np.array([[1.0 / n]]))


def fit_ar(series, p: int, name: str = "y") -> FitResult:
    """OLS of ``y_t`` on ``(1, y_{t-1}, ..., y_{t-p})`` over complete cases."""
    from .reduction import build_conditioning  # reduction imports FitResult

    y = _as_series(series)
    if p < 1:
        raise PreconditionError("autoregressive order must be >= 1")
    if y.size <= p + 2:
        raise PreconditionError(f"AR({p}) needs n > {p + 2}, got {y.size}")
    table = DataTable((name,), y[:, None], time_ordered=True)
    roles = VariableRoles(name)
    design = build_conditioning(table, roles, p)
    model = specify_model(ReductionAssumptions(markov_order=p, heterogeneity="Stationary"), roles)
    return fit_ols(design, VariableRoles(name, design.names[1:]), model=model)


def fit_model(table: DataTable, model: StatisticalModel) -> FitResult:
    """Dispatch on the model kind."""
    model.check_data(table)
    if model.kind is ModelKind.SIMPLE_NORMAL:
        fit = fit_simple_normal(table.column(model.roles.response), model.roles.response)
        return _with_model(fit, model)
    if model.kind is ModelKind.AUTOREGRESSIVE:
        fit = fit_ar(table.column(model.roles.response), model.order, model.roles.response)
        return _with_model(fit, model)
    return fit_ols(table, model.roles, model=model)


def _with_model(fit: FitResult, model: StatisticalModel) -> FitResult:
    from dataclasses import replace

    return replace(fit, model=model)


def coefficient_t_test(fit: FitResult, index: int = 0, value: float = 0.0,
                       alpha: float = 0.05) -> TestResult:
    """Two-sided t test of ``coefficient[index] = value`` with ``n - k`` df."""
    se = float(fit.standard_errors[index])
    if se <= 0.0:
        raise ArithmeticError("zero standard error; t statistic undefined")
    t = (float(fit.coefficients[index]) - value) / se
    null = NullDistribution("t", (fit.df_resid,), two_sided=True)
    return TestResult.from_statistic(f"t({fit.names[index]} = {value:g})", t, null, alpha,
                                     method="Student t")


# ---------------------------------------------------------------------------
# Report layout
# ---------------------------------------------------------------------------


def _fmt(v: float, digits: int) -> str:
    return f"{v:.{digits}g}"


def format_fit(fit: FitResult, digits: int = 6) -> str:
    """Regression equation with standard errors beneath each estimate, then R^2 and s."""
    y = fit.model.roles.response
    terms = []
    for i, nm in enumerate(fit.names):
        est = _fmt(fit.coefficients[i], digits)
        se = f"({_fmt(fit.standard_errors[i], digits)})"
        if i == 0:
            label = ""
        else:
            label = f" {nm}"
            if est.startswith("-"):
                est = est[1:]
                sign = "- "
            else:
                sign = "+ "
            est = sign + est
            se = "  " + se
        terms.append((est + label, se))
    lhs = f"{y} = "
    top = lhs
    bottom = " " * len(lhs)
    for est, se in terms:
        width = max(len(est), len(se)) + 2
        top += est.ljust(width)
        bottom += se.ljust(width)
    top += "+ u"
    lines = [
        f"Model: {fit.model.describe()}",
        top.rstrip(),
        bottom.rstrip(),
        f"R^2 = {_fmt(fit.r_squared, digits)}, s = {_fmt(fit.s, digits)}, n = {fit.n}, k = {fit.k}",
    ]
    return "\n".join(lines)
