"""Command-line interface.

Exit codes: 0 success (and adequate, where a verdict is produced),
1 statistically inadequate verdict, 2 operational error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from importlib import resources
from typing import Any

import numpy as np

from . import __version__
from .catalog import ModelKind, StatisticalModel, load_model
from .dataset import DataTable, load_csv
from .errors import DataError, PRError, PreconditionError
from .estimation import fit_model, fit_ols, format_fit
from .kepler import PUBLISHED_S, run_kepler_study
from .misspec import DEFAULT_SPLIT, MisSpecReport, export_tplot, run_battery
from .reduction import (JointNormalSpec, build_conditioning, conditional_regression,
                        conditioned_roles, md_orthogonality)
from .simulate import THREADS_ENV, load_design, resolve_workers, run_design
from .structural import fit_restricted, load_restrictions, substantive_verdict

EXIT_OK = 0
EXIT_INADEQUATE = 1
EXIT_ERROR = 2

COMMANDS = ("fit", "diagnose", "reduce", "restrict", "simulate", "kepler")


@dataclass(frozen=True)
class RunConfig:
    command: str
    data: Path | None = None
    model: Path | None = None
    alpha: float = 0.01
    format: str = "text"
    seed: int | None = None
    out: Path | None = None
    lags: int | None = None
    split: float = DEFAULT_SPLIT
    restrictions: Path | None = None
    fail_on_inadequate: bool = False

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise PreconditionError(f"unknown command {self.command!r}")
        if not 0.0 < self.alpha <= 0.5:
            raise PreconditionError(f"--alpha must lie in (0, 0.5], got {self.alpha}")
        if self.lags is not None and self.lags < 1:
            raise PreconditionError("--lags must be >= 1")
        if not 0.0 < self.split < 1.0:
            raise PreconditionError("--split must lie in (0, 1)")

    def require(self, *fields: str) -> None:
        missing = [f for f in fields if getattr(self, f) is None]
        if missing:
            flags = ", ".join("--" + f.replace("_", "-") for f in missing)
            raise PreconditionError(f"{self.command} requires {flags}")


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _jsonable(obj: Any) -> Any:
    """Replace non-finite floats by None and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def load_schema(command: str) -> dict[str, Any]:
    """JSON schema shipped for a command's ``--format json`` output."""
    if command not in COMMANDS:
        raise PreconditionError(f"no schema for {command!r}")
    text = resources.files(__package__).joinpath("schemas", f"{command}.schema.json").read_text()
    return json.loads(text)


def _emit(cfg: RunConfig, text: str, payload: dict[str, Any]) -> None:
    body = dumps(payload) if cfg.format == "json" else text.rstrip("\n") + "\n"
    if cfg.out is None:
        sys.stdout.write(body)
    else:
        cfg.out.write_text(body, encoding="utf-8")


def _load(cfg: RunConfig) -> tuple[DataTable, StatisticalModel]:
    cfg.require("data", "model")
    model = load_model(cfg.model)
    table = load_csv(cfg.data)
    model.check_data(table)
    return table, model


def _verdict_code(cfg: RunConfig, adequate: bool, gate: bool) -> int:
    return EXIT_INADEQUATE if (gate or cfg.fail_on_inadequate) and not adequate else EXIT_OK


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_fit(cfg: RunConfig) -> int:
    table, model = _load(cfg)
    fit = fit_model(table, model)
    payload: dict[str, Any] = {"fit": fit.to_dict()}
    text = format_fit(fit)
    adequate = True
    if cfg.fail_on_inadequate:
        report = run_battery(fit, table, cfg.alpha, cfg.lags, cfg.split)
        payload["battery"] = report.to_dict()
        text += "\n\n" + report.render_text()
        adequate = report.adequate
    _emit(cfg, text, payload)
    return _verdict_code(cfg, adequate, gate=False)


def cmd_diagnose(cfg: RunConfig, tplot: Path | None = None) -> int:
    table, model = _load(cfg)
    fit = fit_model(table, model)
    report = run_battery(fit, table, cfg.alpha, cfg.lags, cfg.split)
    if tplot is not None:
        export_tplot(fit.residuals, tplot)
    _emit(cfg, format_fit(fit) + "\n\n" + report.render_text(),
          {"fit": fit.to_dict(), "report": report.to_dict()})
    return _verdict_code(cfg, report.adequate, gate=True)


def _joint_from_file(path: Path) -> tuple[JointNormalSpec, int, list[int]]:
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
        joint = JointNormalSpec(spec["mean"], spec["covariance"])
        target = int(spec.get("target", 0))
        cond = spec.get("conditioning")
        cond = [i for i in range(joint.dim) if i != target] if cond is None else [int(i) for i in cond]
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc.msg})") from None
    except KeyError as exc:
        raise DataError(f"joint specification missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PRError):
            raise
        raise DataError(f"invalid joint specification: {exc}") from None
    return joint, target, cond


def cmd_reduce(cfg: RunConfig, joint_path: Path | None = None) -> int:
    if joint_path is not None:
        joint, target, cond = _joint_from_file(joint_path)
        params = conditional_regression(joint, target, cond)
        lines = [f"Conditional regression of Z[{target}] on Z{cond}",
                 f"beta0  = {params.beta0:.10g}",
                 "beta1  = [" + ", ".join(f"{b:.10g}" for b in params.beta1) + "]",
                 f"sigma2 = {params.sigma2:.10g}"]
        _emit(cfg, "\n".join(lines), {"target": target, "conditioning": cond,
                                      "parameters": params.to_dict()})
        return EXIT_OK

    table, model = _load(cfg)
    order = cfg.lags if cfg.lags is not None else model.order
    # One extra lag is held out of the conditioning set to probe orthogonality.
    design = build_conditioning(table, model.roles, order + 1)
    full = conditioned_roles(design)
    held_out = {f"{c}_lag{order + 1}" for c in (model.roles.response, *model.roles.regressors)}
    roles = replace(full, regressors=tuple(c for c in full.regressors if c not in held_out))
    fit = fit_ols(design, roles)
    checks = md_orthogonality(fit, design, full.regressors)
    lines = [f"Conditioning information set (lag order {order}): "
             + ", ".join(roles.regressors), "", format_fit(fit), "",
             f"{'Column':<20} {'corr(resid, col)':>18}  Role"]
    for c in checks:
        corr = "undefined" if c.correlation is None else f"{c.correlation:.6g}"
        lines.append(f"{c.name:<20} {corr:>18}  {'included' if c.included else 'held out'}")
    payload = {"lag_order": order, "conditioning": list(roles.regressors),
               "fit": fit.to_dict(),
               "orthogonality": [{"column": c.name, "correlation": c.correlation,
                                  "included": c.included} for c in checks]}
    adequate = True
    if cfg.fail_on_inadequate:
        report = run_battery(fit, design, cfg.alpha, split=cfg.split)
        payload["battery"] = report.to_dict()
        lines += ["", report.render_text()]
        adequate = report.adequate
    _emit(cfg, "\n".join(lines), payload)
    return _verdict_code(cfg, adequate, gate=False)


def cmd_restrict(cfg: RunConfig) -> int:
    cfg.require("restrictions")
    table, model = _load(cfg)
    spec = load_restrictions(cfg.restrictions)
    fit = fit_model(table, model)
    battery: MisSpecReport | None = run_battery(fit, table, cfg.alpha, cfg.lags, cfg.split)
    work, roles = table, model.roles
    if model.kind is ModelKind.AUTOREGRESSIVE:
        work = build_conditioning(table, model.roles, model.order)
        roles = conditioned_roles(work)
    elif model.kind is ModelKind.SIMPLE_NORMAL:
        raise PreconditionError("restrictions need a regression model")
    restricted = fit_restricted(work, roles, spec.R, spec.r, cfg.alpha, battery)
    verdict = substantive_verdict(restricted.test, battery)
    t = restricted.test
    names = fit.names
    lines = [f"Restrictions: {spec.description or f'{restricted.q} linear restriction(s)'}",
             "", "Unrestricted:", format_fit(fit), "", "Restricted:"]
    lines += [f"  {nm:<16} {b:>14.8g}  ({se:.6g})"
              for nm, b, se in zip(names, restricted.coefficients, restricted.standard_errors)]
    lines += ["", battery.render_text(), "",
              f"Over-identifying restrictions: F = {t.statistic:.6g} ~ {t.null.label}, "
              f"p = {t.p_value:.4g} -> {'REJECT' if t.reject else 'accept'}"]
    lines += [f"Warning: {w}" for w in t.warnings]
    lines.append("Substantively adequate: " + ("yes" if verdict.substantively_adequate else "no")
                 + f" ({verdict.disclaimer})")
    payload = {
        "description": spec.description,
        "unrestricted": fit.to_dict(),
        "restricted": {"coefficients": [{"name": nm, "estimate": float(b), "std_error": float(se)}
                                        for nm, b, se in zip(names, restricted.coefficients,
                                                             restricted.standard_errors)],
                       "ssr": restricted.ssr, "s": restricted.s},
        "battery": battery.to_dict(),
        "test": t.to_dict(),
        "substantively_adequate": verdict.substantively_adequate,
        "disclaimer": verdict.disclaimer,
    }
    _emit(cfg, "\n".join(lines), payload)
    return _verdict_code(cfg, verdict.substantively_adequate, gate=False)


def cmd_simulate(cfg: RunConfig, design_path: Path | None, timing: bool) -> int:
    if design_path is None:
        raise PreconditionError("simulate requires --design")
    design = load_design(design_path)
    if cfg.seed is not None:
        design = replace(design, seed=cfg.seed)
    result = run_design(design, resolve_workers(), timing=timing)
    text = (f"rejection rate = {result['rejection_rate']:.6g} (mc se {result['mc_se']:.3g}), "
            f"{result['rejections']}/{result['replications']} at nominal "
            f"{design.nominal_alpha:g}, seed {design.seed}")
    # JSON is the primary artifact of a simulation run.
    if cfg.format == "text" and cfg.out is None:
        sys.stdout.write(text + "\n")
    else:
        _emit(replace(cfg, format="json"), text, result)
    return EXIT_OK


def cmd_kepler(cfg: RunConfig, noise_sd: float | None, kappa: float) -> int:
    data = load_csv(cfg.data) if cfg.data is not None else None
    if data is None:
        cfg.require("seed")
    study = run_kepler_study(noise_sd=PUBLISHED_S if noise_sd is None else noise_sd,
                             seed=cfg.seed or 0, alpha=cfg.alpha, kappa=kappa, data=data,
                             lags=cfg.lags, split=cfg.split)
    _emit(cfg, study.render_text(), study.to_dict())
    return _verdict_code(cfg, study.adequate, gate=False)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", type=Path, help="CSV file with a header row")
    common.add_argument("--model", type=Path, help="model declaration JSON")
    common.add_argument("--alpha", type=float, default=0.01,
                        help="significance level in (0, 0.5] (default 0.01)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", type=Path, help="write the report here instead of stdout")
    common.add_argument("--lags", type=int, help="portmanteau lags / conditioning lag order")
    common.add_argument("--split", type=float, default=DEFAULT_SPLIT,
                        help="row fraction of the first t-invariance sub-sample")
    common.add_argument("--restrictions", type=Path, help="restriction JSON {R, r}")
    common.add_argument("--fail-on-inadequate", action="store_true",
                        help="exit 1 when the battery verdict is inadequate")

    parser = argparse.ArgumentParser(
        prog="pradequacy",
        description="Statistical model specification, misspecification testing and "
                    "adequacy assessment.",
        epilog=f"{THREADS_ENV} caps simulator threads. Exit codes: 0 ok/adequate, "
               "1 inadequate, 2 error.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("fit", parents=[common], help="estimate a declared model")
    p = sub.add_parser("diagnose", parents=[common], help="run the misspecification battery")
    p.add_argument("--tplot", type=Path, help="export residual t-plot / P-P / Q-Q data as CSV")
    p = sub.add_parser("reduce", parents=[common],
                       help="conditional parameterization or conditioning-set check")
    p.add_argument("--joint", type=Path, help="joint Normal JSON {mean, covariance, target, conditioning}")
    sub.add_parser("restrict", parents=[common], help="test structural restrictions")
    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo actual error probabilities")
    p.add_argument("--design", type=Path, help="simulation design JSON")
    p.add_argument("--timing", action="store_true", help="record runtime in the JSON result")
    p = sub.add_parser("kepler", parents=[common], help="Kepler first-law case study")
    p.add_argument("--noise-sd", type=float, help="noise sd of synthetic 1/r (default the published s)")
    p.add_argument("--kappa", type=float, default=1.0, help="Kepler's constant")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(args.command, args.data, args.model, args.alpha, args.format, args.seed,
                     args.out, args.lags, args.split, args.restrictions, args.fail_on_inadequate)


def run(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if cfg.command == "fit":
        return cmd_fit(cfg)
    if cfg.command == "diagnose":
        return cmd_diagnose(cfg, args.tplot)
    if cfg.command == "reduce":
        return cmd_reduce(cfg, args.joint)
    if cfg.command == "restrict":
        return cmd_restrict(cfg)
    if cfg.command == "simulate":
        return cmd_simulate(cfg, args.design, args.timing)
    return cmd_kepler(cfg, args.noise_sd, args.kappa)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (PRError, ArithmeticError, OSError) as exc:
        print(f"pradequacy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # keep the exit-code contract for unexpected failures too
        print(f"pradequacy {args.command}: internal error: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
