"""Embedding structural models in a statistical model.

A structural model is represented by linear restrictions ``R theta = r`` on
the mean parameters of a fitted linear regression, optionally with a linear
map ``theta = A phi (+ a)`` from the structural parameters ``phi``.  The map
gives identification (``A`` of full column rank); when ``phi`` has fewer
parameters than ``theta`` the implied over-identifying restrictions are
testable against the unrestricted, statistically adequate benchmark.

The structural-error assumptions (zero mean, constant variance, no
autocorrelation, orthogonality to the modeled influences) hold for every
value of the unmodeled factors and cannot be tested directly; they are
carried as metadata only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .dataset import DataTable, VariableRoles
from .errors import DataError, PreconditionError, RankDeficiencyError
from .catalog import StatisticalModel
from .estimation import FitResult, design_matrix, fit_ols
from .misspec import MisSpecReport
from .results import NullDistribution, TestResult

IDENTIFICATION_TOL = 1e-10
CONSTRAINT_TOL = 1e-10

STRUCTURAL_ERROR_ASSUMPTIONS = (
    "[i] zero mean for all values of the modeled and unmodeled factors",
    "[ii] constant variance",
    "[iii] no correlation across observations",
    "[iv] uncorrelated with the systematic component (near isolation)",
)
EXTERNAL_VALIDITY_DISCLAIMER = (
    "substantive adequacy also depends on whether the structural model captures the "
    "phenomenon of interest; that external-validity question is not assessed here")


@dataclass(frozen=True)
class StructuralSpec:
    """Structural model expressed against a statistical parameterization.

    ``phi_matrix`` (``A``) and ``phi_offset`` (``a``) give ``theta = A phi + a``;
    ``phi_linear=False`` marks a map known only in words.
    """

    description: str
    R: np.ndarray | None = None
    r: np.ndarray | None = None
    phi_matrix: np.ndarray | None = None
    phi_offset: np.ndarray | None = None
    phi_description: str = ""
    phi_linear: bool = True
    unmodeled_factors_note: str = ""
    error_assumptions: tuple[str, ...] = STRUCTURAL_ERROR_ASSUMPTIONS

    def __post_init__(self) -> None:
        if self.R is not None:
            R, r = _as_restrictions(self.R, self.r)
            object.__setattr__(self, "R", R)
            object.__setattr__(self, "r", r)
        if self.phi_matrix is not None:
            A = np.atleast_2d(np.asarray(self.phi_matrix, dtype=float))
            object.__setattr__(self, "phi_matrix", A)
            if self.phi_offset is not None:
                a = np.asarray(self.phi_offset, dtype=float).ravel()
                if a.size != A.shape[0]:
                    raise DataError("phi_offset length must match the rows of phi_matrix")
                object.__setattr__(self, "phi_offset", a)


def _as_restrictions(R, r) -> tuple[np.ndarray, np.ndarray]:
    R = np.atleast_2d(np.asarray(R, dtype=float))
    if R.size == 0:
        raise PreconditionError("at least one restriction is required (q >= 1)")
    r = np.zeros(R.shape[0]) if r is None else np.asarray(r, dtype=float).ravel()
    if r.size != R.shape[0]:
        raise DataError(f"r has {r.size} entries but R has {R.shape[0]} rows")
    if not (np.all(np.isfinite(R)) and np.all(np.isfinite(r))):
        raise DataError("restrictions must be finite")
    return R, r


@dataclass(frozen=True)
class IdentificationReport:
    identified: bool | None
    reason: str
    n_structural: int = 0
    n_statistical: int = 0

    @property
    def overidentifying(self) -> int:
        """Number of over-identifying restrictions implied by the embedding."""
        if not self.identified:
            return 0
        return self.n_statistical - self.n_structural


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    sv = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(sv > IDENTIFICATION_TOL * max(sv[0], np.finfo(float).tiny)))


def check_identification(spec: StructuralSpec,
                         model: StatisticalModel | FitResult | int) -> IdentificationReport:
    """Is ``phi`` uniquely determined by ``theta``?

    ``model`` supplies the number of statistical mean parameters: a model,
    a fit, or the count itself.
    """
    if isinstance(model, StatisticalModel):
        n_statistical = model.n_coefficients
    elif isinstance(model, FitResult):
        n_statistical = model.k
    else:
        n_statistical = int(model)
    if not spec.phi_linear:
        return IdentificationReport(None, "nonlinear phi map: manual verification required",
                                    0, n_statistical)
    if spec.phi_matrix is None:
        raise PreconditionError("identification check needs a phi map")
    A = spec.phi_matrix
    if A.shape[0] != n_statistical:
        raise DataError(f"phi map has {A.shape[0]} rows but the statistical model has "
                        f"{n_statistical} mean parameters")
    p = A.shape[1]
    rank = _rank(A)
    if rank == p:
        extra = n_statistical - p
        reason = "phi map has full column rank"
        reason += f"; {extra} over-identifying restriction(s)" if extra else "; just identified"
        return IdentificationReport(True, reason, p, n_statistical)
    return IdentificationReport(False, f"phi map has rank {rank} < {p} structural parameters",
                                p, n_statistical)


def restrictions_from_map(A: np.ndarray, offset: np.ndarray | None = None
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Restrictions ``R theta = r`` equivalent to ``theta in {A phi + a}``.

    ``R`` spans the left null space of ``A``; raises if there is none
    (just-identified embedding).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    u, sv, _ = np.linalg.svd(A)
    rank = int(np.sum(sv > IDENTIFICATION_TOL * max(sv[0], np.finfo(float).tiny)))
    R = u[:, rank:].T
    if R.shape[0] == 0:
        raise PreconditionError("embedding is just identified: no testable restrictions")
    a = np.zeros(A.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    return R, R @ a


@dataclass(frozen=True)
class RestrictedFit:
    """Least squares under ``R theta = r`` together with its F test."""

    coefficients: np.ndarray
    standard_errors: np.ndarray
    residuals: np.ndarray
    ssr: float
    s: float
    unrestricted: FitResult
    test: TestResult
    R: np.ndarray = field(repr=False)
    r: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return self.R.shape[0]


def _check_rank(R: np.ndarray, k: int) -> None:
    q = R.shape[0]
    if R.shape[1] != k:
        raise DataError(f"R has {R.shape[1]} columns but the model has {k} coefficients")
    if q > k:
        raise PreconditionError(f"{q} restrictions exceed {k} coefficients")
    if _rank(R) < q:
        raise RankDeficiencyError("restriction matrix R is not of full row rank")


def _restricted_solution(fit: FitResult, R: np.ndarray, r: np.ndarray):
    V = fit.xtx_inv
    RV = R @ V
    M = RV @ R.T
    gap = R @ fit.coefficients - r
    lam = np.linalg.solve(M, gap)
    beta = fit.coefficients - RV.T @ lam
    return beta, V - RV.T @ np.linalg.solve(M, RV), gap, M


def fit_restricted(table: DataTable, roles: VariableRoles, R, r=None,
                   alpha: float = 0.05,
                   battery: MisSpecReport | None = None) -> RestrictedFit:
    """Minimize SSR subject to ``R theta = r``.

    The Lagrange-multiplier solution is written in closed form on top of the
    QR-based unrestricted fit: ``b_R = b - V R'(R V R')^{-1}(R b - r)`` with
    ``V = (X'X)^{-1}``.
    """
    R, r = _as_restrictions(R, r)
    fit = fit_ols(table, roles)
    _check_rank(R, fit.k)
    q = R.shape[0]
    n, k = fit.n, fit.k
    if n <= k + q:
        raise PreconditionError(f"need n > k + q = {k + q}, got n = {n}")
    beta, cov_unscaled, gap, M = _restricted_solution(fit, R, r)
    y = fit.fitted + fit.residuals
    resid = y - design_matrix(table, roles.regressors) @ beta
    ssr_r = float(resid @ resid)
    violation = np.max(np.abs(R @ beta - r))
    scale = max(1.0, float(np.max(np.abs(r))), float(np.max(np.abs(R) @ np.abs(beta))))
    if violation > CONSTRAINT_TOL * scale:
        raise ArithmeticError(f"restricted solution violates constraints by {violation:.3g}")

    # SSR_R - SSR_U = gap' (R V R')^{-1} gap; computing it this way avoids cancellation.
    num = float(gap @ np.linalg.solve(M, gap))
    ssr_u = fit.ssr
    warnings: list[str] = []
    if battery is None:
        warnings.append("statistical adequacy of the embedding model was not assessed")
    elif not battery.adequate:
        warnings.append("embedding model is not statistically adequate ("
                        + ", ".join(a.value for a in battery.rejected)
                        + "); the restriction test is unreliable")
    if ssr_u <= 0.0:
        raise ArithmeticError("unrestricted fit is exact; F statistic undefined")
    stat = (num / q) / (ssr_u / (n - k))
    test = TestResult.from_statistic("overidentifying_restrictions", stat,
                                     NullDistribution("F", (q, n - k)), alpha,
                                     method="restricted least squares F",
                                     warnings=tuple(warnings),
                                     details={"ssr_restricted": ssr_r, "ssr_unrestricted": ssr_u})
    s_r = float(np.sqrt(ssr_r / (n - k + q)))
    se = s_r * np.sqrt(np.clip(np.diag(cov_unscaled), 0.0, None))
    return RestrictedFit(beta, se, resid, ssr_r, s_r, fit, test, R, r)


def test_overidentifying(table: DataTable, roles: VariableRoles, R, r=None,
                         alpha: float = 0.05,
                         battery: MisSpecReport | None = None) -> TestResult:
    """F test of ``R theta = r``: ``[(SSR_R - SSR_U)/q] / [SSR_U/(n - k)]`` with F(q, n - k)."""
    return fit_restricted(table, roles, R, r, alpha, battery).test


test_overidentifying.__test__ = False


@dataclass(frozen=True)
class SubstantiveVerdict:
    restrictions_accepted: bool
    statistically_adequate: bool
    disclaimer: str = EXTERNAL_VALIDITY_DISCLAIMER

    @property
    def substantively_adequate(self) -> bool:
        return self.restrictions_accepted and self.statistically_adequate


def substantive_verdict(test: TestResult, battery: MisSpecReport) -> SubstantiveVerdict:
    return SubstantiveVerdict(not test.reject, battery.adequate)


def load_restrictions(path: str | Path) -> StructuralSpec:
    """Read ``{"R": [[...]], "r": [...], "description": "..."}``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc.msg})") from None
    return restrictions_from_dict(spec)


def restrictions_from_dict(spec: Any) -> StructuralSpec:
    if not isinstance(spec, dict) or "R" not in spec:
        raise DataError("restriction file must be an object with an 'R' matrix")
    try:
        return StructuralSpec(str(spec.get("description", "")), spec["R"], spec.get("r"))
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid restrictions: {exc}") from None
