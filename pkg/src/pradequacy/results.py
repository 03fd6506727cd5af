"""Test-result value objects shared by the diagnostic and structural modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from . import special


@dataclass(frozen=True)
class NullDistribution:
    """Reference distribution of a statistic under its null hypothesis.

    ``family`` is one of ``"chi2"``, ``"F"``, ``"t"`` or ``"normal"``.  For the
    symmetric families ``two_sided`` selects ``P(|T| >= |t|)``.
    """

    family: str
    df: tuple[float, ...] = ()
    two_sided: bool = False

    def __post_init__(self) -> None:
        expected = {"chi2": 1, "F": 2, "t": 1, "normal": 0}
        if self.family not in expected:
            raise ValueError(f"unknown null family {self.family!r}")
        object.__setattr__(self, "df", tuple(self.df))
        if len(self.df) != expected[self.family]:
            raise ValueError(f"{self.family} needs {expected[self.family]} degrees of freedom")

    def sf(self, statistic: float) -> float:
        """Upper-tail p-value of ``statistic``."""
        if self.family == "chi2":
            return special.chi_square_sf(statistic, self.df[0])
        if self.family == "F":
            return special.f_sf(statistic, *self.df)
        if self.family == "t":
            if self.two_sided:
                return min(1.0, 2.0 * special.student_t_sf(abs(statistic), self.df[0]))
            return special.student_t_sf(statistic, self.df[0])
        if self.two_sided:
            return min(1.0, 2.0 * special.std_normal_sf(abs(statistic)))
        return special.std_normal_sf(statistic)

    @property
    def label(self) -> str:
        dfs = ", ".join(_fmt_df(d) for d in self.df)
        name = {"chi2": "ChiSquare", "F": "F", "t": "t", "normal": "StdNormal"}[self.family]
        return f"{name}({dfs})" if dfs else name


def _fmt_df(d: float) -> str:
    return str(int(d)) if float(d).is_integer() else f"{d:g}"


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single significance test.

    ``reject`` is ``p_value < alpha`` (strict).
    """

    __test__ = False  # not a pytest class

    name: str
    statistic: float
    null: NullDistribution
    p_value: float
    alpha: float
    method: str = ""
    warnings: tuple[str, ...] = ()
    details: dict[str, Any] = field(default_factory=dict, compare=False)

    @classmethod
    def from_statistic(cls, name: str, statistic: float, null: NullDistribution,
                       alpha: float, **kwargs: Any) -> TestResult:
        statistic = float(statistic)
        if not math.isfinite(statistic):
            raise ArithmeticError(f"{name}: statistic is not finite")
        # Round-off can push a zero statistic slightly negative.
        if null.family in ("chi2", "F") and statistic < 0:
            statistic = 0.0
        p = null.sf(statistic)
        return cls(name, statistic, null, min(max(p, 0.0), 1.0), alpha, **kwargs)

    @property
    def reject(self) -> bool:
        return self.p_value < self.alpha

    @property
    def df(self) -> tuple[float, ...]:
        return self.null.df

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "method": self.method,
            "statistic": self.statistic,
            "null_distribution": self.null.label,
            "df": [_json_df(d) for d in self.null.df],
            "p_value": self.p_value,
            "reject": self.reject,
            "warnings": list(self.warnings),
        }


def _json_df(d: float) -> int | float:
    return int(d) if float(d).is_integer() else float(d)
