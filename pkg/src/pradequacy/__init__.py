"""Probabilistic Reduction toolkit: specify, estimate, probe and validate statistical models."""

__version__ = "0.1.0"

from .catalog import (Assumption, ModelKind, ReductionAssumptions, StatisticalModel,
                      assumption_list, load_model, specify_model)
from .dataset import DataTable, VariableRoles, add_lags, load_csv, split_rows
from .errors import (ConvergenceError, DataError, DegenerateResidualsError, DomainError,
                     NotApplicableError, NotInCatalogError, PRError, PreconditionError,
                     RankDeficiencyError, SingularCovarianceError)
from .estimation import FitResult, fit_ar, fit_model, fit_ols, fit_simple_normal, format_fit
from .kepler import make_kepler_table, run_kepler_study, structural_interpretation
from .misspec import (MisSpecReport, run_battery, test_homoskedasticity, test_independence,
                      test_linearity, test_normality, test_t_invariance)
from .reduction import JointNormalSpec, RegressionParams, conditional_regression, md_orthogonality
from .results import NullDistribution, TestResult
from .simulate import DGPSpec, Procedure, SimDesign, SimResult, actual_size, power_curve
from .structural import (StructuralSpec, check_identification, fit_restricted,
                         test_overidentifying)

__all__ = [
    "Assumption", "ConvergenceError", "DGPSpec", "DataError", "DataTable",
    "DegenerateResidualsError", "DomainError", "FitResult", "JointNormalSpec", "MisSpecReport",
    "ModelKind", "NotApplicableError", "NotInCatalogError", "NullDistribution", "PRError",
    "PreconditionError", "Procedure", "RankDeficiencyError", "ReductionAssumptions",
    "RegressionParams", "SimDesign", "SimResult", "SingularCovarianceError", "StatisticalModel",
    "StructuralSpec", "TestResult", "VariableRoles", "actual_size", "add_lags",
    "assumption_list", "check_identification", "conditional_regression", "fit_ar", "fit_model",
    "fit_ols", "fit_restricted", "fit_simple_normal", "format_fit", "load_csv", "load_model",
    "make_kepler_table", "md_orthogonality", "power_curve", "run_battery", "run_kepler_study",
    "specify_model", "split_rows", "structural_interpretation", "test_homoskedasticity",
    "test_independence", "test_linearity", "test_normality", "test_overidentifying",
    "test_t_invariance",
]
