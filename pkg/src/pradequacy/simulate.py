"""Monte Carlo harness for actual versus nominal error probabilities.

Replication ``i`` of a design with seed ``s`` draws from its own Philox
stream keyed by ``SeedSequence(s, spawn_key=(i,))``, so results do not depend
on how replications are scheduled across threads.  Normal variates come from
the AS 241 inverse CDF applied to open-interval uniforms.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import misspec
from .dataset import DataTable, VariableRoles
from .errors import DataError, PreconditionError
from .estimation import coefficient_t_test, fit_ols, fit_simple_normal
from .special import normal_quantile_array
from .structural import test_overidentifying

DGP_KINDS = ("niid_normal", "ar_errors", "heteroskedastic_x", "mean_trend", "skewed_errors")
X_DESIGNS = ("normal", "uniform", "equispaced")
PROCEDURES = ("coefficient_t", "misspec", "overidentifying")
MISSPEC_TESTS = ("normality", "independence", "linearity", "homoskedasticity", "t_invariance")
THREADS_ENV = "PR_ADEQUACY_THREADS"
MAX_SEED = 2 ** 64


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


def replication_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def seed_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def standard_normals(rng: np.random.Generator, size: int | tuple[int, ...]) -> np.ndarray:
    """Inverse-transform standard normals from 52-bit uniforms on the open interval (0, 1)."""
    k = rng.integers(0, 2 ** 52, size=size, dtype=np.int64)
    u = (k.astype(float) + 0.5) * 2.0 ** -52
    return normal_quantile_array(u)


# ---------------------------------------------------------------------------
# Data-generating processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Backbone:
    """Regression mean ``beta0 + beta1' x``; ``design`` picks how x is drawn."""

    beta0: float = 0.0
    beta1: tuple[float, ...] = (1.0,)
    design: str = "normal"

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta1", tuple(float(b) for b in self.beta1))
        if not self.beta1:
            raise DataError("backbone needs at least one slope")
        if self.design not in X_DESIGNS:
            raise DataError(f"x design must be one of {', '.join(X_DESIGNS)}")

    @property
    def regressor_names(self) -> tuple[str, ...]:
        k = len(self.beta1)
        return ("x",) if k == 1 else tuple(f"x{j}" for j in range(1, k + 1))


@dataclass(frozen=True)
class DGPSpec:
    """A data-generating process.

    Errors are ``sigma * e`` with ``e`` standard normal unless the kind says
    otherwise:

    * ``ar_errors``: ``u_t = rho u_{t-1} + sigma e_t`` after ``burn_in`` draws.
    * ``heteroskedastic_x``: sd ``sigma (offset + gamma |x_1|)``; needs a backbone.
    * ``mean_trend``: mean gains ``delta * t / n``.
    * ``skewed_errors``: standardized Gamma(``shape``) errors times sigma.

    The mean is ``mu`` without a backbone and ``beta0 + beta1' x`` with one.
    """

    kind: str
    n: int
    mu: float = 0.0
    sigma2: float = 1.0
    rho: float = 0.0
    gamma: float = 0.0
    offset: float = 1.0
    delta: float = 0.0
    shape: float = 1.0
    burn_in: int = 100
    backbone: Backbone | None = None

    def __post_init__(self) -> None:
        if self.kind not in DGP_KINDS:
            raise DataError(f"unknown DGP kind {self.kind!r}; choose from {', '.join(DGP_KINDS)}")
        if int(self.n) != self.n or self.n < 20:
            raise PreconditionError(f"n must be an integer >= 20, got {self.n}")
        if not self.sigma2 >= 0:
            raise PreconditionError("sigma2 must be >= 0")
        if not abs(self.rho) < 1:
            raise PreconditionError("|rho| must be < 1")
        if self.gamma < 0 or self.offset < 0:
            raise PreconditionError("gamma and offset must be >= 0")
        if not self.shape > 0:
            raise PreconditionError("shape must be positive")
        if self.burn_in < 0:
            raise PreconditionError("burn_in must be >= 0")
        if self.kind == "heteroskedastic_x" and self.backbone is None:
            raise PreconditionError("heteroskedastic_x needs a regression backbone")

    @property
    def roles(self) -> VariableRoles:
        return VariableRoles("y", self.backbone.regressor_names if self.backbone else ())


def _regressors(bb: Backbone, n: int, rng: np.random.Generator) -> np.ndarray:
    k = len(bb.beta1)
    if bb.design == "normal":
        return standard_normals(rng, (n, k))
    if bb.design == "uniform":
        return math.sqrt(3.0) * (2.0 * rng.random((n, k)) - 1.0)
    return np.tile(np.linspace(-1.0, 1.0, n)[:, None], (1, k))


def _ar_filter(e: np.ndarray, rho: float) -> np.ndarray:
    u = np.empty_like(e)
    prev = 0.0
    for t, et in enumerate(e):
        prev = rho * prev + et
        u[t] = prev
    return u


def generate(dgp: DGPSpec, seed: int | np.random.Generator) -> DataTable:
    """One sample of ``dgp.n`` rows with column ``y`` (and ``x``... for a backbone)."""
    rng = seed if isinstance(seed, np.random.Generator) else seed_rng(_check_seed(seed))
    n = dgp.n
    sigma = math.sqrt(dgp.sigma2)
    bb = dgp.backbone
    X = _regressors(bb, n, rng) if bb is not None else None

    if dgp.kind == "ar_errors":
        e = standard_normals(rng, n + dgp.burn_in)
        u = sigma * _ar_filter(e, dgp.rho)[dgp.burn_in:]
    elif dgp.kind == "skewed_errors":
        g = rng.standard_gamma(dgp.shape, size=n)
        u = sigma * (g - dgp.shape) / math.sqrt(dgp.shape)
    else:
        u = sigma * standard_normals(rng, n)
        if dgp.kind == "heteroskedastic_x":
            u = u * (dgp.offset + dgp.gamma * np.abs(X[:, 0]))

    if bb is not None:
        mean = bb.beta0 + X @ np.asarray(bb.beta1)
    else:
        mean = np.full(n, dgp.mu)
    if dgp.kind == "mean_trend":
        mean = mean + dgp.delta * np.arange(1, n + 1) / n

    y = mean + u
    if bb is None:
        return DataTable(("y",), y[:, None], time_ordered=True)
    return DataTable(("y", *bb.regressor_names), np.column_stack([y, X]), time_ordered=True)


# ---------------------------------------------------------------------------
# Designs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Procedure:
    """The inference procedure whose error probabilities are simulated.

    ``coefficient_t`` tests ``coef[index] = value`` (the mean without a
    backbone); ``misspec`` runs the named battery test; ``overidentifying``
    tests ``R theta = r``.
    """

    kind: str
    test: str = ""
    index: int = 0
    value: float = 0.0
    R: tuple[tuple[float, ...], ...] | None = None
    r: tuple[float, ...] | None = None
    lags: int | None = None
    split: float = 0.5
    method: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in PROCEDURES:
            raise DataError(f"unknown procedure {self.kind!r}; choose from {', '.join(PROCEDURES)}")
        if self.kind == "misspec" and self.test not in MISSPEC_TESTS:
            raise DataError(f"misspec procedure needs test in {', '.join(MISSPEC_TESTS)}")
        if self.kind == "overidentifying":
            if self.R is None:
                raise DataError("overidentifying procedure needs R")
            R = tuple(tuple(float(v) for v in row) for row in self.R)
            r = tuple(float(v) for v in self.r) if self.r is not None else (0.0,) * len(R)
            object.__setattr__(self, "R", R)
            object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class SimDesign:
    dgp: DGPSpec
    procedure: Procedure
    nominal_alpha: float = 0.05
    replications: int = 1000
    seed: int = 0
    keep_p_values: bool = False

    def __post_init__(self) -> None:
        if int(self.replications) != self.replications or self.replications < 100:
            raise PreconditionError(f"replications must be an integer >= 100, got {self.replications}")
        if not 0.0 < self.nominal_alpha < 1.0:
            raise PreconditionError("nominal_alpha must lie in (0, 1)")
        _check_seed(self.seed)


def _check_seed(seed: Any) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < MAX_SEED:
        raise PreconditionError(f"seed must be an integer in [0, 2^64), got {seed!r}")
    return int(seed)


@dataclass(frozen=True)
class SimResult:
    rejection_rate: float
    mc_standard_error: float
    rejections: int
    replications: int
    p_values: tuple[float, ...] | None = field(default=None, repr=False)

    def covers(self, level: float, width: float = 3.0) -> bool:
        return abs(self.rejection_rate - level) <= width * self.mc_standard_error


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _p_value(design: SimDesign, table: DataTable) -> float:
    proc = design.procedure
    roles = design.dgp.roles
    alpha = design.nominal_alpha
    if proc.kind == "overidentifying":
        return test_overidentifying(table, roles, np.array(proc.R), np.array(proc.r), alpha).p_value
    if roles.regressors:
        fit = fit_ols(table, roles)
    else:
        fit = fit_simple_normal(table.column("y"))
    if proc.kind == "coefficient_t":
        if not 0 <= proc.index < fit.k:
            raise PreconditionError(f"coefficient index {proc.index} out of range for k={fit.k}")
        return coefficient_t_test(fit, proc.index, proc.value, alpha).p_value
    test = proc.test
    if test == "normality":
        res = misspec.test_normality(fit.residuals, alpha, proc.method or "dagostino")
    elif test == "independence":
        res = misspec.test_independence(fit.residuals, proc.lags, alpha)
    elif test == "linearity":
        res = misspec.test_linearity(fit, table, alpha)
    elif test == "homoskedasticity":
        res = misspec.test_homoskedasticity(fit, table, alpha, proc.method or "glejser")
    else:
        res = misspec.test_t_invariance(table, roles, proc.split, alpha)
    return res.p_value


def replicate(design: SimDesign, index: int) -> float:
    """p-value of replication ``index``."""
    table = generate(design.dgp, replication_rng(design.seed, index))
    return _p_value(design, table)


def _chunk(design: SimDesign, start: int, stop: int) -> list[float]:
    return [replicate(design, i) for i in range(start, stop)]


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            workers = int(raw)
        except ValueError:
            raise PreconditionError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, int(workers))


def _p_values(design: SimDesign, workers: int | None) -> list[float]:
    workers = resolve_workers(workers)
    reps = design.replications
    if workers == 1:
        return _chunk(design, 0, reps)
    size = math.ceil(reps / (4 * workers))
    bounds = [(a, min(a + size, reps)) for a in range(0, reps, size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(lambda b: _chunk(design, *b), bounds)
        return [p for part in parts for p in part]


def _summarize(design: SimDesign, pvals: list[float]) -> SimResult:
    rejections = sum(1 for p in pvals if p < design.nominal_alpha)
    reps = len(pvals)
    rate = rejections / reps
    return SimResult(rate, math.sqrt(rate * (1.0 - rate) / reps), rejections, reps,
                     tuple(pvals) if design.keep_p_values else None)


def actual_size(design: SimDesign, workers: int | None = None) -> SimResult:
    """Fraction of replications with ``p < nominal_alpha``.

    The design's DGP is meant to satisfy the procedure's null hypothesis;
    a misspecified DGP shows how far the actual size moves from nominal.
    """
    return _summarize(design, _p_values(design, workers))


def _deviated(design: SimDesign, deviation: float, parameter: str | None) -> SimDesign:
    if parameter is None:
        proc = design.procedure
        if proc.kind == "coefficient_t":
            return replace(design, procedure=replace(proc, value=proc.value - deviation))
        if proc.kind == "overidentifying":
            return replace(design, procedure=replace(
                proc, r=tuple(v - deviation for v in proc.r)))
        raise PreconditionError("misspec power curves need the DGP parameter to vary")
    if parameter not in {f.name for f in DGPSpec.__dataclass_fields__.values()} \
            or parameter in ("kind", "n", "backbone"):
        raise PreconditionError(f"cannot vary DGP field {parameter!r}")
    return replace(design, dgp=replace(design.dgp, **{parameter: deviation}))


def power_curve(design: SimDesign, deviations, parameter: str | None = None,
                workers: int | None = None) -> list[SimResult]:
    """Rejection rates along a grid of departures from the null.

    Without ``parameter`` the deviation is the gap between the true value and
    the hypothesized one (coefficient or restriction).  With ``parameter`` it
    sets that DGP field (e.g. ``rho``); every grid point reuses the same
    replication streams.
    """
    grid = list(deviations)
    if not grid:
        raise PreconditionError("deviation grid is empty")
    return [actual_size(_deviated(design, float(d), parameter), workers) for d in grid]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def design_from_dict(spec: Any) -> SimDesign:
    if not isinstance(spec, dict):
        raise DataError("design must be a JSON object")
    try:
        dgp_spec = dict(spec["dgp"])
        bb = dgp_spec.pop("backbone", None)
        backbone = Backbone(**bb) if bb else None
        dgp = DGPSpec(backbone=backbone, **dgp_spec)
        procedure = Procedure(**spec["procedure"])
        return SimDesign(dgp, procedure,
                         nominal_alpha=float(spec.get("nominal_alpha", 0.05)),
                         replications=spec.get("replications", 1000),
                         seed=spec.get("seed", 0),
                         keep_p_values=bool(spec.get("keep_p_values", False)))
    except KeyError as exc:
        raise DataError(f"design missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise DataError(f"invalid design: {exc}") from None


def load_design(path: str | Path) -> SimDesign:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        return design_from_dict(json.loads(path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc.msg})") from None


def design_to_dict(design: SimDesign) -> dict[str, Any]:
    d = asdict(design)
    proc = d["procedure"]
    if proc["R"] is not None:
        proc["R"] = [list(row) for row in proc["R"]]
        proc["r"] = list(proc["r"])
    if d["dgp"]["backbone"] is not None:
        d["dgp"]["backbone"]["beta1"] = list(d["dgp"]["backbone"]["beta1"])
    return d


def result_to_dict(design: SimDesign, result: SimResult,
                   runtime: float | None = None) -> dict[str, Any]:
    out: dict[str, Any] = {
        "design": design_to_dict(design),
        "rejection_rate": result.rejection_rate,
        "mc_se": result.mc_standard_error,
        "rejections": result.rejections,
        "replications": result.replications,
    }
    if result.p_values is not None:
        out["p_values"] = list(result.p_values)
    if runtime is not None:
        out["runtime_seconds"] = runtime
    return out


def run_design(design: SimDesign, workers: int | None = None,
               timing: bool = False) -> dict[str, Any]:
    start = time.perf_counter()
    result = actual_size(design, workers)
    return result_to_dict(design, result, time.perf_counter() - start if timing else None)
