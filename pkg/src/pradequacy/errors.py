"""Exception hierarchy shared across the package."""

from __future__ import annotations


class PRError(Exception):
    """Base class for all errors raised by pradequacy."""


class DomainError(PRError, ValueError):
    """An argument lies outside the domain of a function."""


class ConvergenceError(PRError, ArithmeticError):
    """An iterative evaluation hit its iteration cap."""


class DataError(PRError, ValueError):
    """Malformed input data (CSV parse failures, bad columns, bad shapes)."""


class NotInCatalogError(PRError, ValueError):
    """A reduction-assumption combination that no catalog model supports."""


class RankDeficiencyError(PRError, ArithmeticError):
    """A design matrix is (numerically) not of full column rank."""

    def __init__(self, message: str, column: str | None = None):
        super().__init__(message)
        self.column = column


class SingularCovarianceError(PRError, ArithmeticError):
    """A covariance block required for conditioning is singular."""


class DegenerateResidualsError(PRError, ArithmeticError):
    """Residuals carry no variation, so residual-based statistics are undefined."""


class NotApplicableError(PRError):
    """A test cannot be applied to this model or data shape."""


class PreconditionError(PRError, ValueError):
    """A documented precondition of an operation is violated."""
