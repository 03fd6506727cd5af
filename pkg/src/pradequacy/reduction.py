"""Probabilistic reduction: conditional parameterizations and conditioning sets.

Under joint Normality the regression function ``E(y | X = x)`` is linear and
its parameters follow from the moments of the joint distribution.  For data,
the conditioning information set is realized as a design table of
contemporaneous regressors plus lags of the response and regressors, and the
martingale-difference property of the resulting errors is checked through
the sample orthogonality of residuals to candidate conditioning columns.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .dataset import DataTable, VariableRoles, add_lags, lag_name
from .errors import DataError, PreconditionError, SingularCovarianceError
from .estimation import FitResult

PIVOT_TOL = 1e-10
SYMMETRY_TOL = 1e-12


def cholesky(a: np.ndarray, tol: float = PIVOT_TOL) -> np.ndarray:
    """Lower Cholesky factor; a pivot below ``tol * max(diag(a))`` means singular."""
    a = np.asarray(a, dtype=float)
    m = a.shape[0]
    L = np.zeros_like(a)
    ref = max(float(np.max(np.abs(np.diag(a)))), np.finfo(float).tiny) if m else 1.0
    for j in range(m):
        pivot = a[j, j] - L[j, :j] @ L[j, :j]
        if not pivot > tol * ref:
            raise SingularCovarianceError(f"pivot {j} is {pivot:.3g}; matrix is not positive definite")
        L[j, j] = np.sqrt(pivot)
        L[j + 1:, j] = (a[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = np.linalg.solve(np.tril(L), b)
    return np.linalg.solve(np.tril(L).T, z)


@dataclass(frozen=True)
class JointNormalSpec:
    """Mean vector and covariance matrix of a joint Normal distribution."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.covariance, dtype=float)
        m = mean.size
        if cov.shape != (m, m):
            raise DataError(f"covariance must be {m}x{m}, got shape {cov.shape}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise DataError("mean and covariance must be finite")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise DataError("covariance matrix is not symmetric")
        cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class RegressionParams:
    beta0: float
    beta1: np.ndarray
    sigma2: float

    def to_dict(self) -> dict:
        return {"beta0": self.beta0, "beta1": [float(b) for b in self.beta1],
                "sigma2": self.sigma2}


def conditional_regression(joint: JointNormalSpec, target: int,
                           conditioning: Sequence[int]) -> RegressionParams:
    """Parameters of ``E(y | X)`` and ``Var(y | X)`` for ``y = Z[target]``, ``X = Z[conditioning]``.

    ``beta1 = S22^{-1} s21``, ``beta0 = mu_y - beta1' mu_x`` and
    ``sigma2 = s_yy - s21' S22^{-1} s21``.
    """
    idx = list(conditioning)
    m = joint.dim
    if not 0 <= target < m or any(not 0 <= i < m for i in idx):
        raise PreconditionError(f"indices must lie in [0, {m})")
    if target in idx:
        raise PreconditionError("target index appears in the conditioning set")
    if len(set(idx)) != len(idx):
        raise PreconditionError("conditioning indices must be distinct")
    mu, cov = joint.mean, joint.covariance
    if not idx:
        return RegressionParams(float(mu[target]), np.zeros(0), float(cov[target, target]))
    s22 = cov[np.ix_(idx, idx)]
    s21 = cov[idx, target]
    try:
        L = cholesky(s22)
    except SingularCovarianceError as exc:
        raise SingularCovarianceError(f"conditioning covariance singular: {exc}") from None
    beta1 = cho_solve(L, s21)
    beta0 = float(mu[target] - beta1 @ mu[idx])
    sigma2 = float(cov[target, target] - s21 @ beta1)
    return RegressionParams(beta0, beta1, sigma2)


@dataclass(frozen=True)
class OrthogonalityCheck:
    name: str
    correlation: float | None
    included: bool

    @property
    def defined(self) -> bool:
        return self.correlation is not None


def _corr(a: np.ndarray, b: np.ndarray) -> float | None:
    a = a - a.mean()
    b = b - b.mean()
    na, nb = np.sqrt(a @ a), np.sqrt(b @ b)
    if na == 0.0 or nb == 0.0:
        return None
    return float((a @ b) / (na * nb))


def md_orthogonality(fit: FitResult, table: DataTable,
                     conditioning: Sequence[str]) -> list[OrthogonalityCheck]:
    """Sample correlation of residuals with each named column.

    Columns used as regressors in ``fit`` are flagged ``included``; for them
    least squares forces the correlation to zero.  ``None`` marks a column or
    residual vector without variation.
    """
    if fit.residuals.size != table.n:
        raise PreconditionError(f"fit has {fit.residuals.size} residuals but table has "
                                f"{table.n} rows")
    included = set(fit.names)
    return [OrthogonalityCheck(nm, _corr(fit.residuals, table.column(nm)), nm in included)
            for nm in conditioning]


def build_conditioning(table: DataTable, roles: VariableRoles, lag_order: int) -> DataTable:
    """Design table ``[y, X_t, y_lag1..p, x_lag1..p for each x]`` on complete cases.

    With ``lag_order = 0`` this is the static regression design.
    """
    roles.validate(table)
    if lag_order < 0:
        raise PreconditionError("lag_order must be >= 0")
    base = table.select([roles.response, *roles.regressors])
    if lag_order == 0:
        return base
    out = add_lags(base, roles.response, lag_order)
    for x in roles.regressors:
        lagged = add_lags(base, x, lag_order)
        out = out.with_columns({lag_name(x, j): lagged.column(lag_name(x, j))
                                for j in range(1, lag_order + 1)})
    return out


def conditioned_roles(design: DataTable) -> VariableRoles:
    """Roles for a table produced by :func:`build_conditioning`."""
    return VariableRoles(design.names[0], design.names[1:])
