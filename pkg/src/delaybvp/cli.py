"""Command-line front end.

Subcommands: ``solve`` (eigenvalue table), ``charfn`` (characteristic
function samples), ``eigfn`` (one eigenfunction against its asymptotic
forms), ``verify`` (rate report), ``validate`` (constraint report).  Every
command is a pure function of its JSON config: reruns produce byte-identical
primary output.

Exit codes: 0 success, 1 config or validation error, 2 solver failure,
3 verification threshold failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics, dde_solver, picard, spectral
from .exprlang import ExprError, parse as parse_expr
from .problem import (HALF, Case1RequiredError, ProblemSpec,
                      check_refined_conditions, validate)

__all__ = ["main", "load_config", "RunConfig", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3


class ConfigError(ValueError):
    """Malformed configuration; the message names the offending key."""


@dataclass(frozen=True)
class SolverSettings:
    steps_per_segment: int = dde_solver.DEFAULT_STEPS
    refine_tol: float = spectral.DEFAULT_REFINE_TOL
    quadrature_points: int = asymptotics.DEFAULT_QUAD


@dataclass(frozen=True)
class RunConfig:
    problem: ProblemSpec
    solver: SolverSettings
    n_range: tuple[int, int] | None
    s_range: tuple[float, float, int] | None
    out_format: str
    out_path: str | None
    x_samples: int


def _angle(raw, key: str) -> float:
    """Angles and the coupling accept numbers or constant expressions
    ('pi/2' reads better than 1.5707963267948966 in a config file)."""
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        return float(raw)
    if isinstance(raw, str):
        try:
            return float(parse_expr(raw).eval(0.0))
        except ExprError as exc:
            raise ConfigError(f"problem.{key}: {exc}") from exc
    raise ConfigError(f"problem.{key}: expected a number or expression string")


def _expr_field(section: dict, key: str) -> str:
    raw = section.get(key)
    if not isinstance(raw, str):
        raise ConfigError(f"problem.{key}: expected an expression string")
    return raw


def _positive(raw, key: str, kind=float):
    try:
        value = kind(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a positive number") from None
    if value <= 0:
        raise ConfigError(f"{key}: must be positive")
    return value


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")

    prob = doc.get("problem")
    if not isinstance(prob, dict):
        raise ConfigError("problem: section missing")
    try:
        spec = ProblemSpec.from_strings(
            q_left=_expr_field(prob, "q_left"),
            q_right=_expr_field(prob, "q_right"),
            retard_left=_expr_field(prob, "retard_left"),
            retard_right=_expr_field(prob, "retard_right"),
            alpha=_angle(prob.get("alpha"), "alpha"),
            beta=_angle(prob.get("beta"), "beta"),
            coupling=_angle(prob.get("coupling"), "coupling"),
        )
    except ExprError as exc:
        raise ConfigError(f"problem: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(f"problem: {exc}") from exc

    sol = doc.get("solver", {})
    if not isinstance(sol, dict):
        raise ConfigError("solver: expected an object")
    settings = SolverSettings(
        steps_per_segment=_positive(sol.get("steps_per_segment",
                                            dde_solver.DEFAULT_STEPS),
                                    "solver.steps_per_segment", int),
        refine_tol=_positive(sol.get("refine_tol", spectral.DEFAULT_REFINE_TOL),
                             "solver.refine_tol"),
        quadrature_points=_positive(sol.get("quadrature_points",
                                            asymptotics.DEFAULT_QUAD),
                                    "solver.quadrature_points", int),
    )

    rng = doc.get("range")
    if not isinstance(rng, dict):
        raise ConfigError("range: section missing")
    n_range = None
    s_range = None
    if "n_min" in rng or "n_max" in rng:
        if "s_min" in rng or "s_max" in rng:
            raise ConfigError("range: give either an n-range or an s-range, not both")
        n_min = _positive(rng.get("n_min"), "range.n_min", int)
        n_max = _positive(rng.get("n_max"), "range.n_max", int)
        if n_max < n_min:
            raise ConfigError("range.n_max: must be >= range.n_min")
        n_range = (n_min, n_max)
    elif "s_min" in rng or "s_max" in rng:
        s_min = _positive(rng.get("s_min"), "range.s_min")
        s_max = _positive(rng.get("s_max"), "range.s_max")
        if s_max <= s_min:
            raise ConfigError("range.s_max: must exceed range.s_min")
        samples = _positive(rng.get("samples"), "range.samples", int)
        if samples < 2:
            raise ConfigError("range.samples: need at least 2")
        s_range = (s_min, s_max, samples)
    else:
        raise ConfigError("range: need n_min/n_max or s_min/s_max/samples")

    out = doc.get("output", {})
    if not isinstance(out, dict):
        raise ConfigError("output: expected an object")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format: expected 'csv' or 'json'")
    grid = doc.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("grid: expected an object")
    x_samples = _positive(grid.get("x_samples", 201), "grid.x_samples", int)

    return RunConfig(problem=spec, solver=settings, n_range=n_range,
                     s_range=s_range, out_format=fmt,
                     out_path=out.get("path"), x_samples=x_samples)


# --- output helpers ---------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _emit_table(columns: list[str], rows: list[tuple], fmt: str, out_path: str | None) -> None:
    if fmt == "csv":
        lines = [",".join(columns)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    else:
        payload = [dict(zip(columns, (v if isinstance(v, (bool, int)) else float(v)
                                      for v in row))) for row in rows]
        text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _validated_or_fail(cfg: RunConfig) -> None:
    report = validate(cfg.problem)
    if not report.passed:
        for line in report.lines():
            print(line, file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


# --- subcommands ------------------------------------------------------------


def _solve_pairs(cfg: RunConfig) -> list[spectral.Eigenpair]:
    if cfg.n_range is not None:
        n_min, n_max = cfg.n_range
        return spectral.localize_range(cfg.problem, range(n_min, n_max + 1),
                                       cfg.solver.refine_tol,
                                       cfg.solver.steps_per_segment)
    s_min, s_max, samples = cfg.s_range
    return spectral.scan_roots(cfg.problem, s_min, s_max, samples,
                               cfg.solver.refine_tol, cfg.solver.steps_per_segment)


def cmd_solve(cfg: RunConfig, out_path: str | None, fmt: str) -> int:
    _validated_or_fail(cfg)
    pairs = _solve_pairs(cfg)
    certs = spectral.simplicity_certificates(cfg.problem, pairs,
                                             steps=cfg.solver.steps_per_segment)
    rows = [(p.index, p.s, p.lam, p.F_residual, bool(c.passed))
            for p, c in zip(pairs, certs)]
    _emit_table(["n", "s_n", "lambda_n", "F_residual", "simplicity_ok"],
                rows, fmt, out_path)
    return EXIT_OK


def cmd_charfn(cfg: RunConfig, out_path: str | None, fmt: str) -> int:
    _validated_or_fail(cfg)
    if cfg.s_range is None:
        raise ConfigError("range: charfn needs an s-range (s_min/s_max/samples)")
    s_min, s_max, samples = cfg.s_range
    grid = np.linspace(s_min, s_max, samples)
    F = spectral.char_fn_samples(cfg.problem, grid, cfg.solver.steps_per_segment)
    rows = [(float(s), float(s * s), float(f)) for s, f in zip(grid, F)]
    _emit_table(["s", "lambda", "F"], rows, fmt, out_path)
    return EXIT_OK


def cmd_eigfn(cfg: RunConfig, n: int | None, out_path: str | None, fmt: str) -> int:
    _validated_or_fail(cfg)
    if n is None:
        raise ConfigError("--n: eigfn needs the eigenvalue index")
    pair = spectral.localize_near_n(cfg.problem, n, cfg.solver.refine_tol,
                                    cfg.solver.steps_per_segment)
    xs = np.linspace(0.0, math.pi, cfg.x_samples)
    xs = xs[np.abs(xs - HALF) > 1e-12]
    left = xs < HALF
    u = np.empty_like(xs)
    u[left] = pair.left.eval(xs[left])
    u[~left] = pair.right.eval(xs[~left])
    u_lead = asymptotics.predict_eigenfunction(cfg.problem, n, xs, "leading",
                                               cfg.solver.quadrature_points)
    u_ref = asymptotics.predict_eigenfunction(cfg.problem, n, xs, "refined",
                                              cfg.solver.quadrature_points)
    rows = [(float(x), float(uv), float(ul), float(ur),
             float(abs(uv - ul)), float(abs(uv - ur)))
            for x, uv, ul, ur in zip(xs, u, u_lead, u_ref)]
    _emit_table(["x", "u_computed", "u_leading", "u_refined",
                 "abs_err_leading", "abs_err_refined"], rows, fmt, out_path)
    return EXIT_OK


def _slope_dict(fit: asymptotics.SlopeFit) -> dict:
    return {"slope": fit.slope, "points": fit.points,
            "floor_limited": fit.floor_limited}


def cmd_verify(cfg: RunConfig, out_path: str | None, fmt: str) -> int:
    _validated_or_fail(cfg)
    if cfg.n_range is None:
        raise ConfigError("range: verify needs an n-range (n_min/n_max)")
    n_min, n_max = cfg.n_range
    indices = range(n_min, n_max + 1)
    if len(indices) < 8:
        print(f"verify needs at least 8 indices; n range [{n_min}, {n_max}] "
              f"supplies {len(indices)} (widen range.n_max)", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    pairs = spectral.localize_range(cfg.problem, indices, cfg.solver.refine_tol,
                                    cfg.solver.steps_per_segment)
    estimates = [asymptotics.predict_s(cfg.problem, n, cfg.solver.quadrature_points)
                 for n in indices]
    report = asymptotics.verify_rates(cfg.problem, pairs, estimates,
                                      cfg.solver.quadrature_points)

    table = [{"n": n, "s_n": s, "s_refined": r,
              "abs_residual": abs(s - r), "drift": d}
             for n, s, r, d in zip(report.indices, report.s_values,
                                   report.s_refined, report.drift)]
    payload = {
        "passed": report.passed,
        "drift": {"first_half_max": report.drift_first_max,
                  "second_half_max": report.drift_second_max,
                  "bounded": report.drift_bounded},
        "refined_s_fit": _slope_dict(report.refined_s_fit),
        "leading_eigfn_fit": _slope_dict(report.leading_eigfn_fit),
        "refined_eigfn_fit": _slope_dict(report.refined_eigfn_fit),
        "right_refined_fit_printed": _slope_dict(report.right_refined_fit_printed),
        "right_refined_fit_alt": _slope_dict(report.right_refined_fit_alt),
        "amplitude_ratio": {"measured": report.amp_ratio,
                            "expected": report.amp_ratio_expected,
                            "relative_error": report.amp_rel_err},
        "oscillatory_decay": {"s": list(report.osc_s),
                              "values": list(report.osc_values),
                              "fit": _slope_dict(report.osc_fit)},
        "residual_table": table,
    }
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    def show(name, fit, threshold):
        state = ("floor-limited" if fit.floor_limited
                 else f"slope {fit.slope:+.3f} (threshold {threshold:+.2f})")
        print(f"  {name}: {state} -> {'ok' if fit.ok(threshold) else 'FAIL'}",
              file=sys.stderr)

    print(f"verify over n in [{n_min}, {n_max}]:", file=sys.stderr)
    print(f"  drift bound: {report.drift_second_max:.3e} vs "
          f"{report.drift_first_max:.3e} -> "
          f"{'ok' if report.drift_bounded else 'FAIL'}", file=sys.stderr)
    show("eigenvalue refinement", report.refined_s_fit,
         asymptotics.S_REFINED_SLOPE_MAX)
    show("eigenfunction (leading)", report.leading_eigfn_fit,
         asymptotics.EIGFN_LEADING_SLOPE_MAX)
    show("eigenfunction (refined)", report.refined_eigfn_fit,
         asymptotics.EIGFN_REFINED_SLOPE_MAX)
    print(f"  right-interval inner scaling, printed vs alternative: "
          f"{report.right_refined_fit_printed.slope} vs "
          f"{report.right_refined_fit_alt.slope}", file=sys.stderr)
    print(f"  amplitude ratio: {report.amp_ratio:.6g} vs expected "
          f"{report.amp_ratio_expected:.6g} "
          f"({100 * report.amp_rel_err:.2f}% off)", file=sys.stderr)
    show("oscillatory integral decay", report.osc_fit,
         asymptotics.OSC_DECAY_SLOPE_MAX)
    print(f"  overall: {'PASS' if report.passed else 'FAIL'}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_validate(cfg: RunConfig, out_path: str | None, fmt: str) -> int:
    report = validate(cfg.problem)
    conditions = check_refined_conditions(cfg.problem)
    if fmt == "json":
        payload = {
            "valid": report.passed,
            "checks": [{"name": c.name, "passed": c.passed,
                        "worst_x": c.worst_x, "detail": c.detail}
                       for c in report.checks + conditions.checks],
            "refined_conditions": conditions.passed,
            "case1": conditions.case1,
        }
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = report.lines() + conditions.lines()
        lines.append(f"valid: {report.passed}; refined conditions: "
                     f"{conditions.passed}; case1: {conditions.case1}")
        text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report.passed else EXIT_CONFIG


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="delaybvp",
        description="Eigenvalues of a delayed transmission boundary value problem.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("solve", "locate eigenvalues and emit the eigenvalue table"),
        ("charfn", "sample the characteristic function on an s-grid"),
        ("eigfn", "tabulate one eigenfunction against its asymptotic forms"),
        ("verify", "measure asymptotic rates and report pass/fail"),
        ("validate", "check the problem constraints and report"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON problem config")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", default=None, choices=("csv", "json"),
                       help="output format (default from config, else csv)")
        if name == "eigfn":
            p.add_argument("--n", type=int, default=None,
                           help="eigenvalue index to tabulate")
    return ap


_SOLVER_ERRORS = (dde_solver.NonFiniteStateError, dde_solver.DelayRangeError,
                  spectral.ZeroOrManyError, picard.ContractionError,
                  picard.PicardDivergedError, Case1RequiredError)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.out_format
    out_path = args.out or cfg.out_path
    handlers = {
        "solve": lambda: cmd_solve(cfg, out_path, fmt),
        "charfn": lambda: cmd_charfn(cfg, out_path, fmt),
        "eigfn": lambda: cmd_eigfn(cfg, getattr(args, "n", None), out_path, fmt),
        "verify": lambda: cmd_verify(cfg, out_path, fmt),
        "validate": lambda: cmd_validate(cfg, out_path, fmt),
    }
    try:
        return handlers[args.command]()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return int(exc.code)
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
