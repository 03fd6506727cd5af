"""Kepler's first law as a statistically adequate linear regression.

In polar coordinates an elliptical orbit satisfies ``1/r = a0 + a1 cos(theta)``,
so with ``y = 1/r`` and ``x = cos(theta)`` the law is a linear regression.
Newtonian gravitation later gave the coefficients a structural reading:
``a0 = MG / (4 kappa^2)`` (kappa is Kepler's constant) and ``a1 = 1/d - a0``
with ``d`` the shortest planet-sun distance.

The original Mars observations are not available here, so the study builds
synthetic data from the published estimates (n = 28, s = 1.11479e-5).
Point estimates are therefore recovered by construction; the published
standard errors can only be matched in order of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .catalog import ReductionAssumptions, specify_model
from .dataset import DataTable, VariableRoles
from .errors import DataError, DomainError, NotApplicableError
from .estimation import FitResult, fit_model, format_fit
from .misspec import MisSpecReport, run_battery
from .simulate import seed_rng, standard_normals
from .structural import (EXTERNAL_VALIDITY_DISCLAIMER, IdentificationReport, StructuralSpec,
                         check_identification)

ALPHA0 = 0.662062
ALPHA1 = 0.061333
PUBLISHED_S = 0.0000111479
PUBLISHED_SE = (0.000002, 0.000003)
PUBLISHED_R2 = 0.999
N_OBS = 28

ROLES = VariableRoles("y", ("x",))
DATA_NOTE = ("synthetic data generated from the published coefficients and s; the "
             "original observations are not reproduced, so point estimates are "
             "recovered by construction and standard errors match only in order of magnitude")
UNMODELED_NOTE = ("structural error covers unmodeled effects; its assumptions fail under "
                  "systematic observation error, third-body or general-relativity effects")


def default_angles(n: int = N_OBS) -> np.ndarray:
    """``n`` equispaced angles on ``[0, 2 pi)``."""
    return 2.0 * math.pi * np.arange(n) / n


def make_kepler_table(angles=None, alpha0: float = ALPHA0, alpha1: float = ALPHA1,
                      noise_sd: float = 0.0, seed: int = 0) -> DataTable:
    """Columns ``theta``, ``x = cos(theta)`` and ``y = 1/r = alpha0 + alpha1 x + noise``."""
    theta = default_angles() if angles is None else np.asarray(angles, dtype=float).ravel()
    if noise_sd < 0:
        raise DomainError("noise_sd must be >= 0")
    x = np.cos(theta)
    y = alpha0 + alpha1 * x
    if noise_sd > 0:
        y = y + noise_sd * standard_normals(seed_rng(seed), theta.size)
    if np.any(y <= 0):
        raise DomainError("parameters give a nonpositive 1/r; distances must be positive")
    return DataTable(("theta", "x", "y"), np.column_stack([theta, x, y]), time_ordered=True)


def table_from_observations(obs: DataTable) -> DataTable:
    """Convert a ``(theta, r)`` table to the regression variables."""
    for col in ("theta", "r"):
        if col not in obs:
            raise DataError(f"Kepler data needs columns 'theta' and 'r'; missing {col!r}")
    r = obs.column("r")
    if np.any(r <= 0):
        raise DataError("distances r must be positive")
    theta = obs.column("theta")
    return DataTable(("theta", "x", "y"), np.column_stack([theta, np.cos(theta), 1.0 / r]),
                     time_ordered=obs.time_ordered)


@dataclass(frozen=True)
class KeplerStructuralParams:
    alpha0: float
    alpha1: float
    kappa: float
    d: float
    MG: float

    def coefficients(self) -> tuple[float, float]:
        """Inverse map back to the regression coefficients."""
        a0 = self.MG / (4.0 * self.kappa ** 2)
        return a0, 1.0 / self.d - a0


def structural_interpretation(alpha0: float, alpha1: float, kappa: float = 1.0
                              ) -> KeplerStructuralParams:
    """``MG = 4 kappa^2 alpha0`` and ``d = 1/(alpha0 + alpha1)``."""
    if not alpha0 > 0 or not alpha0 + alpha1 > 0 or not kappa > 0:
        raise DomainError("need alpha0 > 0, alpha0 + alpha1 > 0 and kappa > 0")
    return KeplerStructuralParams(alpha0, alpha1, kappa, 1.0 / (alpha0 + alpha1),
                                  4.0 * kappa ** 2 * alpha0)


def from_structural(MG: float, d: float, kappa: float = 1.0) -> tuple[float, float]:
    if not (MG > 0 and d > 0 and kappa > 0):
        raise DomainError("MG, d and kappa must be positive")
    a0 = MG / (4.0 * kappa ** 2)
    return a0, 1.0 / d - a0


NEWTON_EMBEDDING = StructuralSpec(
    description="Newtonian reading of the elliptical-orbit regression",
    phi_matrix=np.eye(2),
    phi_description="(alpha0, alpha1) = (beta0, beta1); MG = 4 kappa^2 alpha0, d = 1/(alpha0 + alpha1)",
    unmodeled_factors_note=UNMODELED_NOTE,
)


@dataclass(frozen=True)
class KeplerStudy:
    table: DataTable = field(repr=False)
    fit: FitResult
    battery: MisSpecReport | None
    battery_note: str
    structural: KeplerStructuralParams | None
    identification: IdentificationReport
    synthetic: bool
    noise_sd: float
    seed: int

    @property
    def adequate(self) -> bool:
        return self.battery is not None and self.battery.adequate

    def to_dict(self) -> dict[str, Any]:
        return {
            "data": "synthetic" if self.synthetic else "user",
            "data_note": DATA_NOTE if self.synthetic else "user-supplied (theta, r) data",
            "angles": "equispaced on [0, 2pi)" if self.synthetic else "from data",
            "noise_sd": self.noise_sd,
            "seed": self.seed,
            "fit": self.fit.to_dict(),
            "published": {"beta0": ALPHA0, "beta1": ALPHA1, "std_errors": list(PUBLISHED_SE),
                          "r_squared": PUBLISHED_R2, "s": PUBLISHED_S, "n": N_OBS},
            "battery": self.battery.to_dict() if self.battery else None,
            "battery_note": self.battery_note,
            "adequate": self.adequate,
            "structural": None if self.structural is None else {
                "alpha0": self.structural.alpha0, "alpha1": self.structural.alpha1,
                "kappa": self.structural.kappa, "MG": self.structural.MG, "d": self.structural.d},
            "identification": {"identified": self.identification.identified,
                               "reason": self.identification.reason},
            "disclaimer": EXTERNAL_VALIDITY_DISCLAIMER,
        }

    def render_text(self) -> str:
        lines = ["Kepler's first law: 1/r = alpha0 + alpha1 cos(theta)"]
        if self.synthetic:
            lines.append(f"Data: {DATA_NOTE}.")
            lines.append(f"Angles: {self.fit.n} equispaced on [0, 2pi); noise sd = "
                         f"{self.noise_sd:g}; seed = {self.seed}")
        else:
            lines.append("Data: user-supplied (theta, r) observations")
        lines.append("")
        lines.append(format_fit(self.fit))
        lines.append(f"Published: y = {ALPHA0} + {ALPHA1} x, se ({PUBLISHED_SE[0]}, "
                     f"{PUBLISHED_SE[1]}), R^2 = {PUBLISHED_R2}, s = {PUBLISHED_S}, n = {N_OBS}")
        lines.append("")
        if self.battery is not None:
            lines.append(self.battery.render_text())
        else:
            lines.append(f"Misspecification battery not applicable: {self.battery_note}")
        lines.append("")
        if self.structural is not None:
            p = self.structural
            lines.append(f"Structural reading (kappa = {p.kappa:g}): MG = {p.MG:.10g}, "
                         f"d = {p.d:.10g}")
        lines.append(f"Identification: {self.identification.reason}")
        lines.append(f"Note: {EXTERNAL_VALIDITY_DISCLAIMER}.")
        return "\n".join(lines)


def run_kepler_study(noise_sd: float = PUBLISHED_S, seed: int = 0, alpha: float = 0.01,
                     kappa: float = 1.0, angles=None, data: DataTable | None = None,
                     lags: int | None = None, split: float = 0.5) -> KeplerStudy:
    """Fit the regression, run the battery and attach the structural reading.

    ``data`` (a ``(theta, r)`` table) replaces the synthetic sample.
    """
    if data is not None:
        table = table_from_observations(data)
    else:
        table = make_kepler_table(angles, ALPHA0, ALPHA1, noise_sd, seed)
    model = specify_model(ReductionAssumptions(), ROLES)
    fit = fit_model(table, model)
    try:
        battery = run_battery(fit, table, alpha, lags=lags, split=split)
        note = ""
    except NotApplicableError as exc:
        battery, note = None, str(exc)
    a0, a1 = fit.coefficients
    try:
        structural = structural_interpretation(float(a0), float(a1), kappa)
    except DomainError:
        structural = None
    ident = check_identification(NEWTON_EMBEDDING, model)
    return KeplerStudy(table, fit, battery, note, structural, ident, data is None,
                       noise_sd, seed)
