"""Statistical models declared through (D, M, H) reduction assumptions.

A model in the catalog is identified by one choice from each category:
Distribution (Normal), Dependence (Independent or Markov of order p) and
Heterogeneity (Identical or Stationary).  Together with the variable roles
and, for regressions, an interpretation of the regressors (fixed by
experimental design or jointly random with the response), the choice picks
one of four parameterizations.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .dataset import DataTable, VariableRoles
from .errors import DataError, NotInCatalogError

DISTRIBUTIONS = ("Normal",)
HETEROGENEITY = ("Identical", "Stationary")

SUPPORTED_REDUCTIONS = (
    "Normal + Independent + Identical, no regressors -> SimpleNormal",
    "Normal + Independent + Identical, fixed regressors -> GaussLinear",
    "Normal + Independent + Identical, random regressors -> LinearRegression",
    "Normal + Markov(p) + Stationary, no regressors -> AutoRegressive(p)",
)


class ModelKind(str, enum.Enum):
    SIMPLE_NORMAL = "SimpleNormal"
    GAUSS_LINEAR = "GaussLinear"
    LINEAR_REGRESSION = "LinearRegression"
    AUTOREGRESSIVE = "AutoRegressive"


class Assumption(str, enum.Enum):
    NORMALITY = "Normality"
    LINEARITY = "LinearityOfConditionalMean"
    HOMOSKEDASTICITY = "Homoskedasticity"
    INDEPENDENCE = "Independence"
    T_INVARIANCE = "ParameterTInvariance"


@dataclass(frozen=True)
class ReductionAssumptions:
    """One choice per (D, M, H) category.

    ``markov_order`` is 0 for independence and p >= 1 for Markov(p).
    """

    distribution: str = "Normal"
    markov_order: int = 0
    heterogeneity: str = "Identical"

    def __post_init__(self) -> None:
        if self.distribution not in DISTRIBUTIONS:
            raise NotInCatalogError(
                f"distribution {self.distribution!r} not in catalog; supported: "
                + "; ".join(SUPPORTED_REDUCTIONS))
        if self.heterogeneity not in HETEROGENEITY:
            raise NotInCatalogError(
                f"heterogeneity {self.heterogeneity!r} not in catalog; supported: "
                + "; ".join(SUPPORTED_REDUCTIONS))
        if int(self.markov_order) != self.markov_order or self.markov_order < 0:
            raise DataError(f"markov_order must be a nonnegative integer, got {self.markov_order!r}")

    @property
    def dependence(self) -> str:
        return "Independent" if self.markov_order == 0 else f"Markov({self.markov_order})"

    @classmethod
    def parse(cls, distribution: str, dependence: str, heterogeneity: str) -> ReductionAssumptions:
        dep = dependence.strip()
        if dep == "Independent":
            order = 0
        else:
            m = re.fullmatch(r"Markov(?:\((\d+)\))?", dep)
            if m is None:
                raise NotInCatalogError(f"dependence {dependence!r} not in catalog; "
                                        "use 'Independent' or 'Markov(p)'")
            order = int(m.group(1) or 1)
            if order < 1:
                raise NotInCatalogError("Markov order must be >= 1")
        return cls(distribution.strip(), order, heterogeneity.strip())


@dataclass(frozen=True)
class StatisticalModel:
    kind: ModelKind
    roles: VariableRoles
    reduction: ReductionAssumptions
    x_random: bool = True

    @property
    def order(self) -> int:
        return self.reduction.markov_order

    @property
    def parameter_names(self) -> tuple[str, ...]:
        if self.kind is ModelKind.SIMPLE_NORMAL:
            return ("mu", "sigma2")
        if self.kind is ModelKind.AUTOREGRESSIVE:
            return ("const", *(f"{self.roles.response}_lag{j}" for j in range(1, self.order + 1)),
                    "sigma2")
        return ("const", *self.roles.regressors, "sigma2")

    @property
    def n_coefficients(self) -> int:
        """Mean-parameter count (everything in theta except sigma2)."""
        return len(self.parameter_names) - 1

    def check_data(self, table: DataTable) -> None:
        self.roles.validate(table)
        if self.order > 0 and not table.time_ordered:
            raise NotInCatalogError("Markov dependence requires time-ordered data")

    def describe(self) -> str:
        r = self.reduction
        label = self.kind.value
        if self.kind is ModelKind.AUTOREGRESSIVE:
            label += f"({self.order})"
        return f"{label} [{r.distribution}, {r.dependence}, {r.heterogeneity}]"


def specify_model(reduction: ReductionAssumptions, roles: VariableRoles,
                  x_random: bool = True) -> StatisticalModel:
    """Map a reduction-assumption triple and variable roles to a catalog model."""
    has_x = bool(roles.regressors)
    r = reduction
    if r.markov_order == 0 and r.heterogeneity == "Identical":
        if not has_x:
            kind = ModelKind.SIMPLE_NORMAL
        else:
            kind = ModelKind.LINEAR_REGRESSION if x_random else ModelKind.GAUSS_LINEAR
    elif r.markov_order > 0 and r.heterogeneity == "Stationary" and not has_x:
        kind = ModelKind.AUTOREGRESSIVE
    else:
        shape = "with regressors" if has_x else "univariate"
        raise NotInCatalogError(
            f"({r.distribution}, {r.dependence}, {r.heterogeneity}) {shape} is not in catalog; "
            "supported reductions: " + "; ".join(SUPPORTED_REDUCTIONS))
    return StatisticalModel(kind, roles, reduction, x_random if has_x else True)


_ASSUMPTIONS = {
    ModelKind.SIMPLE_NORMAL: (Assumption.NORMALITY, Assumption.INDEPENDENCE,
                              Assumption.T_INVARIANCE),
    ModelKind.GAUSS_LINEAR: (Assumption.NORMALITY, Assumption.LINEARITY,
                             Assumption.HOMOSKEDASTICITY, Assumption.INDEPENDENCE,
                             Assumption.T_INVARIANCE),
    ModelKind.AUTOREGRESSIVE: (Assumption.NORMALITY, Assumption.INDEPENDENCE,
                               Assumption.T_INVARIANCE, Assumption.LINEARITY),
}
_ASSUMPTIONS[ModelKind.LINEAR_REGRESSION] = _ASSUMPTIONS[ModelKind.GAUSS_LINEAR]


def assumption_list(model: StatisticalModel) -> tuple[Assumption, ...]:
    """Testable assumptions of ``model`` in battery order.

    For autoregressions ``Independence`` refers to the residuals, i.e. the
    martingale-difference property of the errors relative to the lags.
    """
    return _ASSUMPTIONS[model.kind]


def model_from_dict(spec: dict[str, Any]) -> StatisticalModel:
    """Build a model from the declaration-file mapping."""
    try:
        reduction = ReductionAssumptions.parse(
            str(spec.get("distribution", "Normal")),
            str(spec.get("dependence", "Independent")),
            str(spec.get("heterogeneity", "Identical")),
        )
        response = spec["response"]
    except KeyError as exc:
        raise DataError(f"model declaration missing field {exc.args[0]!r}") from None
    regressors = spec.get("regressors", [])
    if not isinstance(response, str) or not isinstance(regressors, list) \
            or not all(isinstance(x, str) for x in regressors):
        raise DataError("model declaration: 'response' must be a string and "
                        "'regressors' a list of strings")
    interp = spec.get("x_interpretation", "random")
    if interp not in ("random", "fixed"):
        raise DataError("x_interpretation must be 'random' or 'fixed'")
    return specify_model(reduction, VariableRoles(response, tuple(regressors)),
                         x_random=(interp == "random"))


def load_model(path: str | Path) -> StatisticalModel:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(spec, dict):
        raise DataError(f"{path}: model declaration must be a JSON object")
    return model_from_dict(spec)


def model_to_dict(model: StatisticalModel) -> dict[str, Any]:
    return {
        "kind": model.kind.value,
        "distribution": model.reduction.distribution,
        "dependence": model.reduction.dependence,
        "heterogeneity": model.reduction.heterogeneity,
        "response": model.roles.response,
        "regressors": list(model.roles.regressors),
        "x_interpretation": "random" if model.x_random else "fixed",
    }
