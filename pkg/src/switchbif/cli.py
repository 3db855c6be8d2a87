"""Command-line interface.

    switchbif <subcommand> [--config FILE] [--out DIR] [flags]
    switchbif paper-example <subcommand> [--out DIR] [flags]

Subcommands: validate, simulate, poincare, classify, delta-sweep,
bifurcate, branch, verify-global.  ``paper-example`` runs any of them
on the built-in benchmark system.  Exit codes: 0 success, 1
validation/parse error, 2 numerical failure, 3 internal error.

Outputs are deterministic: identical config and command produce
byte-identical files.  CSV files carry a comment line naming the tool
version and config label, then a header row; JSON reports embed the
same metadata, with floats serialized to 17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .analytic import classify_origin, delta, delta_prime
from .bifurcation import (bifurcation_direction, check_global_conditions,
                          continue_branch, find_critical_lambda,
                          fit_local_expansion, fit_scaling_law)
from .config import (RunConfig, paper_example_config, parse_config,
                     parse_constant_expression)
from .errors import (BudgetError, DomainError, EscapeError,
                     InsufficientDataError, NoBracketError,
                     NoConvergenceError, NoOrbitError, OriginError,
                     ParseError, PerturbationTooSmallError, SideError,
                     StiffnessError, SwitchBifError, TangencyError,
                     ValidationError)
from .model import validate
from .numeric import (StopAfterEvents, StopAtTime, StopOnReturn, integrate,
                      poincare_numeric)

_USER_ERRORS = (ParseError, ValidationError, DomainError, OriginError, SideError)
_NUMERIC_ERRORS = (NoOrbitError, NoConvergenceError, TangencyError, EscapeError,
                   BudgetError, StiffnessError, NoBracketError,
                   PerturbationTooSmallError, InsufficientDataError)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_dumps_report(report: dict) -> str:
    """Flat-report JSON with floats at 17 significant digits."""

    def render(obj, indent):
        pad = "  " * indent
        if isinstance(obj, dict):
            if not obj:
                return "{}"
            items = []
            for k in sorted(obj):
                items.append(f'{pad}  {json.dumps(k)}: {render(obj[k], indent + 1)}')
            return "{\n" + ",\n".join(items) + f"\n{pad}}}"
        if isinstance(obj, (list, tuple)):
            if not obj:
                return "[]"
            items = [f'{pad}  {render(v, indent + 1)}' for v in obj]
            return "[\n" + ",\n".join(items) + f"\n{pad}]"
        if isinstance(obj, bool):
            return "true" if obj else "false"
        if isinstance(obj, float):
            return _fmt(obj)
        if obj is None:
            return "null"
        return json.dumps(obj)

    return render(report, 0) + "\n"


def _meta(config: RunConfig, command: str) -> dict:
    return {"tool": "switchbif", "version": __version__,
            "command": command, "config": config.label}


def _csv_header(config: RunConfig, command: str, columns: list[str]) -> str:
    return (f"# switchbif {__version__} {command} config={config.label}\n"
            + ",".join(columns) + "\n")


def _write_output(text: str, out_dir: str | None, filename: str,
                  echo: bool = True) -> None:
    if out_dir is not None:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / filename).write_text(text, encoding="utf-8")
        print(f"wrote {path / filename}")
    elif echo:
        sys.stdout.write(text)


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [parse_constant_expression(part.strip(), what)
                for part in text.split(",") if part.strip()]
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"bad {what}: {exc}") from exc


# -- subcommand handlers -------------------------------------------------------


def _cmd_validate(config: RunConfig, args) -> int:
    report = validate(config.system)
    doc = _meta(config, "validate")
    doc.update({"passed": report.passed, "violations": list(report.violations)})
    _write_output(_json_dumps_report(doc), args.out, "validate.json")
    return 0 if report.passed else 1


def _stop_condition(args, options: dict):
    chosen = [name for name, val in (("t_max", args.t_max),
                                     ("n_events", args.n_events),
                                     ("return_to_section", args.return_to_section))
              if val not in (None, False)]
    if len(chosen) > 1:
        raise ParseError("give only one of --t-max, --n-events, --return-to-section")
    if args.t_max is not None:
        return StopAtTime(args.t_max)
    if args.n_events is not None:
        return StopAfterEvents(args.n_events)
    if args.return_to_section:
        return StopOnReturn()
    if "t_max" in options:
        return StopAtTime(float(options["t_max"]))
    if "n_events" in options:
        return StopAfterEvents(int(options["n_events"]))
    if options.get("return_to_section"):
        return StopOnReturn()
    raise ParseError("a stop condition is required: --t-max, --n-events or --return-to-section")


def _cmd_simulate(config: RunConfig, args) -> int:
    lam = _option_lambda(config, args)
    if args.x0 is not None:
        x0 = _parse_floats(args.x0, "--x0")
    else:
        x0 = [float(v) for v in config.options.get("x0", [1.0, 0.0])]
    if len(x0) != 2:
        raise ParseError("--x0 must be two comma-separated numbers")
    stop = _stop_condition(args, config.options)
    traj = integrate(config.system, x0, lam, stop, config.integrator)

    lines = [_csv_header(config, "simulate", ["t", "x1", "x2", "quadrant", "event"])]
    n_events = len(traj.events)
    for ai, arc in enumerate(traj.arcs):
        start = 1 if ai > 0 else 0  # first sample duplicates the previous event row
        last = len(arc.times) - 1
        for si in range(start, last + 1):
            is_event = si == last and ai < n_events
            lines.append(",".join([_fmt(arc.times[si]), _fmt(arc.states[si][0]),
                                   _fmt(arc.states[si][1]), str(int(arc.quadrant)),
                                   "1" if is_event else "0"]) + "\n")
    _write_output("".join(lines), args.out, "trajectory.csv")
    return 0


def _cmd_poincare(config: RunConfig, args) -> int:
    lam = _option_lambda(config, args)
    if args.x1 is not None:
        x1_values = _parse_floats(args.x1, "--x1")
    else:
        x1_values = [float(v) for v in config.options.get("x1_values", [])]
    if not x1_values:
        raise ParseError("--x1 requires at least one value")
    lines = [_csv_header(config, "poincare", ["x1_in", "x1_out", "period"])]
    for x1 in x1_values:
        s = poincare_numeric(config.system, x1, lam, config.integrator)
        lines.append(",".join([_fmt(s.x1_in), _fmt(s.x1_out), _fmt(s.period)]) + "\n")
    _write_output("".join(lines), args.out, "poincare.csv")
    return 0


def _cmd_classify(config: RunConfig, args) -> int:
    lam = _option_lambda(config, args)
    d = delta(config.system.params, lam)
    verdict = classify_origin(config.system.params, lam)
    doc = _meta(config, "classify")
    doc.update({"lambda": lam, "delta": d, "class": verdict.value})
    _write_output(_json_dumps_report(doc), args.out, "classify.json")
    return 0


def _cmd_delta_sweep(config: RunConfig, args) -> int:
    if args.lambdas is not None:
        lams = _parse_floats(args.lambdas, "--lambdas")
    else:
        lo = args.lambda_min if args.lambda_min is not None else None
        hi = args.lambda_max if args.lambda_max is not None else None
        if lo is None or hi is None:
            raise ParseError("give --lambdas or both --lambda-min and --lambda-max")
        n = args.n
        lams = [lo + (hi - lo) * i / (n - 1) for i in range(n)] if n > 1 else [lo]
    lines = [_csv_header(config, "delta-sweep", ["lambda", "delta", "delta_prime"])]
    for lam in lams:
        lines.append(",".join([_fmt(lam), _fmt(delta(config.system.params, lam)),
                               _fmt(delta_prime(config.system.params, lam))]) + "\n")
    _write_output("".join(lines), args.out, "delta_sweep.csv")
    return 0


def _cmd_bifurcate(config: RunConfig, args) -> int:
    if args.bracket is not None:
        bracket = _parse_floats(args.bracket, "--bracket")
    else:
        bracket = [float(v) for v in config.options.get("bracket", [-0.1, 0.1])]
    if len(bracket) != 2:
        raise ParseError("--bracket must be two comma-separated numbers")
    crit = find_critical_lambda(config.system.params, (bracket[0], bracket[1]))
    fit = fit_local_expansion(config.system, crit.lambda_star, config.integrator)
    direction = bifurcation_direction(config.system, config.integrator,
                                      lam_star=crit.lambda_star, expansion=fit)
    doc = _meta(config, "bifurcate")
    doc.update({
        "critical_lambda": crit.lambda_star,
        "delta_prime": crit.delta_prime,
        "nondegenerate": crit.nondegenerate,
        "direction": direction.value,
        "expansion_fit": {
            "delta_lin": fit.delta_lin,
            "delta_coeff": fit.delta_coeff,
            "k_exp": fit.k_exp,
            "fit_residual": fit.fit_residual,
            "x1_grid": list(fit.x1_grid),
        },
    })
    _write_output(_json_dumps_report(doc), args.out, "bifurcate.json")
    return 0


def _cmd_branch(config: RunConfig, args) -> int:
    if args.lambdas is not None:
        lams = _parse_floats(args.lambdas, "--lambdas")
    else:
        lams = [float(v) for v in config.options.get("lambdas", [])]
    if not lams:
        raise ParseError("--lambdas requires at least one value")
    x_scan_max = args.x_scan_max if args.x_scan_max is not None else \
        float(config.options.get("x_scan_max", 10.0))
    result = continue_branch(config.system, lams, config.integrator,
                             x_scan_max=x_scan_max)
    if not result.points:
        raise NoOrbitError(f"no periodic orbit found for any of lambdas {lams}")

    lines = [_csv_header(config, "branch", ["lambda", "x1_fixed", "period", "residual"])]
    for p in result.points:
        lines.append(",".join([_fmt(p.lam), _fmt(p.x1_fixed), _fmt(p.period),
                               _fmt(p.residual)]) + "\n")
    _write_output("".join(lines), args.out, "branch.csv")

    doc = _meta(config, "branch")
    doc["no_orbit_lambdas"] = list(result.no_orbit)
    doc["additional_orbits"] = [{"lambda": p.lam, "x1_fixed": p.x1_fixed,
                                 "period": p.period, "residual": p.residual}
                                for p in result.additional]
    if len(result.points) >= 4:
        fit = fit_scaling_law(result.points)
        doc["scaling_fit"] = {"gamma_est": fit.gamma_est,
                              "exponent_est": fit.exponent_est,
                              "fit_residual": fit.fit_residual}
    else:
        doc["scaling_fit"] = None
    _write_output(_json_dumps_report(doc), args.out, "branch_fit.json")
    return 0


def _cmd_verify_global(config: RunConfig, args) -> int:
    lam = _option_lambda(config, args)
    radius = args.radius_m if args.radius_m is not None else \
        float(config.options.get("radius_m", 10.0))
    n_samples = args.n_samples if args.n_samples is not None else \
        int(config.options.get("n_samples", 100_000))
    rep = check_global_conditions(config.system, lam, radius_M=radius,
                                  n_samples=n_samples)
    def witness_doc(w):
        if w is None:
            return None
        return {"field": w.field_index, "x": list(w.x), "value": w.value,
                "description": w.description}

    doc = _meta(config, "verify-global")
    doc.update({
        "lambda": lam,
        "lyapunov_ok": rep.lyapunov_ok.value,
        "lyapunov_witness": witness_doc(rep.lyapunov_witness),
        "rotation_ok": rep.rotation_ok.value,
        "rotation_witness": witness_doc(rep.rotation_witness),
        "delta_conditions_ok": rep.delta_conditions_ok,
        "samples_used": rep.samples_used,
        "radius_M": rep.radius_M,
        "rotation_pert_inner_max": rep.rotation_pert_inner_max,
        "notes": list(rep.notes),
    })
    _write_output(_json_dumps_report(doc), args.out, "global_check.json")
    all_ok = (rep.lyapunov_ok.value != "fail" and rep.rotation_ok.value != "fail"
              and rep.delta_conditions_ok)
    return 0 if all_ok else 2


def _option_lambda(config: RunConfig, args) -> float:
    if args.lam is not None:
        return args.lam
    if "lambda" in config.options:
        return float(config.options["lambda"])
    return 0.0


_HANDLERS = {
    "validate": _cmd_validate,
    "simulate": _cmd_simulate,
    "poincare": _cmd_poincare,
    "classify": _cmd_classify,
    "delta-sweep": _cmd_delta_sweep,
    "bifurcate": _cmd_bifurcate,
    "branch": _cmd_branch,
    "verify-global": _cmd_verify_global,
}


def _expr_float(text: str) -> float:
    return parse_constant_expression(text, "argument")


def _add_command_parsers(subparsers, with_config: bool) -> None:
    def new_parser(name, help_text):
        p = subparsers.add_parser(name, help=help_text)
        if with_config:
            p.add_argument("--config", required=True, metavar="FILE",
                           help="JSON configuration document")
        p.add_argument("--out", metavar="DIR", default=None,
                       help="directory for output files (default: print to stdout)")
        return p

    p = new_parser("validate", "check the standing assumptions of the configured system")

    p = new_parser("simulate", "integrate a trajectory and export CSV")
    p.add_argument("--lambda", dest="lam", type=_expr_float, default=None)
    p.add_argument("--x0", default=None, help="initial state 'x1,x2'")
    p.add_argument("--t-max", dest="t_max", type=_expr_float, default=None)
    p.add_argument("--n-events", dest="n_events", type=int, default=None)
    p.add_argument("--return-to-section", action="store_true",
                   help="stop at the first return to the positive x1-axis")

    p = new_parser("poincare", "evaluate the return map at given amplitudes")
    p.add_argument("--lambda", dest="lam", type=_expr_float, default=None)
    p.add_argument("--x1", default=None, help="comma-separated amplitudes")

    p = new_parser("classify", "classify the origin of the linear switched system")
    p.add_argument("--lambda", dest="lam", type=_expr_float, default=None)

    p = new_parser("delta-sweep", "tabulate the stability index over a parameter range")
    p.add_argument("--lambdas", default=None, help="comma-separated parameter values")
    p.add_argument("--lambda-min", dest="lambda_min", type=_expr_float, default=None)
    p.add_argument("--lambda-max", dest="lambda_max", type=_expr_float, default=None)
    p.add_argument("--n", type=int, default=101)

    p = new_parser("bifurcate", "locate the critical parameter and the branch direction")
    p.add_argument("--bracket", default=None, help="parameter bracket 'lo,hi'")

    p = new_parser("branch", "continue the periodic-orbit branch over parameter values")
    p.add_argument("--lambdas", default=None, help="comma-separated parameter values")
    p.add_argument("--x-scan-max", dest="x_scan_max", type=_expr_float, default=None)

    p = new_parser("verify-global", "sampled check of the global existence conditions")
    p.add_argument("--lambda", dest="lam", type=_expr_float, default=None)
    p.add_argument("--radius-m", dest="radius_m", type=_expr_float, default=None)
    p.add_argument("--n-samples", dest="n_samples", type=int, default=None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="switchbif",
        description="simulate planar switched systems and analyse their "
                    "switching-induced Hopf-like bifurcation")
    parser.add_argument("--error-json", action="store_true",
                        help="on failure, print a machine-readable error object to stdout")
    parser.add_argument("--version", action="version", version=f"switchbif {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_command_parsers(subparsers, with_config=True)
    pe = subparsers.add_parser("paper-example",
                               help="run a subcommand on the built-in benchmark system")
    pe_sub = pe.add_subparsers(dest="pe_command", required=True)
    _add_command_parsers(pe_sub, with_config=False)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    error_json = args.error_json
    try:
        if args.command == "paper-example":
            command = args.pe_command
            config = paper_example_config()
        else:
            command = args.command
            path = Path(args.config)
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise ParseError(f"cannot read config file: {exc}") from exc
            config = parse_config(text, label=path.name)
        return _HANDLERS[command](config, args)
    except _USER_ERRORS as exc:
        _report_error(exc, 1, error_json)
        return 1
    except _NUMERIC_ERRORS as exc:
        _report_error(exc, 2, error_json)
        return 2
    except SwitchBifError as exc:
        _report_error(exc, 3, error_json)
        return 3


def _report_error(exc: Exception, code: int, error_json: bool) -> None:
    if error_json:
        doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    print(f"switchbif: error: {type(exc).__name__}: {exc}", file=sys.stderr)


if __name__ == "__main__":
    raise SystemExit(main())
