"""Command-line front end: ``dqengine <command> [options]``.

Every command builds a report document. Text mode prints its results (and
suite tables for ``verify``); ``--json`` prints the whole document with a
fixed key order and no timestamps, so identical inputs give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from collections.abc import Sequence

from . import __version__
from .config import Config, ConfigError, load_config
from .dsl import DSLError, elaborate, fermi_space_for, parse, time_function
from .fermi_phase import fermi_star
from .feynman_kac import (
    ConvergenceError,
    Schedule,
    TraceFunction,
    fermi_ground_energy,
    fk_trace_ho,
    fk_trace_quadratic,
    ground_energy_limit,
)
from .moyal import moyal_star
from .propagators import (
    METICULOUS,
    NAIVE,
    BosonicPropagatorSpec,
    CausticError,
    fermi_driven_propagator,
    fermi_ho_propagator,
    ho_propagator,
    quadratic_propagator,
    tabulated,
)
from .star_exp import (
    fermi_star_exp_meticulous,
    fermi_star_exp_naive,
    ho_star_exp_closed,
    ho_star_exp_wick,
    star_exp_from_propagator_bosonic,
)
from .verify import SUITES, run_suites

__all__ = ["main", "run_command", "build_parser", "UsageError", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
SUITE_NAMES = list(SUITES)


class UsageError(ValueError):
    """Bad arguments that argparse itself cannot detect."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- report helpers -------------------------------------------------------------


def _json_number(v):
    if isinstance(v, bool) or v is None or isinstance(v, (str, int)):
        return v
    if isinstance(v, complex):
        if v.imag == 0:
            return _json_number(v.real)
        return {"re": _json_number(v.real), "im": _json_number(v.imag)}
    try:
        f = float(v)
    except (TypeError, ValueError):
        try:
            return _json_number(complex(v))
        except (TypeError, ValueError):
            return str(v)
    if math.isnan(f) or math.isinf(f):
        return str(f)
    return f


def _text_value(v) -> str:
    if isinstance(v, complex):
        if v.imag == 0:
            return _text_value(v.real)
        return f"{v.real:.12g}{v.imag:+.12g}i"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _result(name, value, tolerance, route, provenance="computed") -> dict:
    return {"name": name, "value": value, "tolerance": tolerance, "provenance": provenance, "route": route}


# -- argument parsing -----------------------------------------------------------


def _pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _schedule(text: str) -> list[float]:
    parts = text.split(",")
    if not 4 <= len(parts) <= 5:
        raise argparse.ArgumentTypeError("schedule is tau0,growth,max_steps,tol[,min_tau]")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric schedule {text!r}") from None


def _samples(text: str) -> tuple[list[float], list[float]]:
    ts, vs = [], []
    for item in text.split(","):
        try:
            t, v = item.split(":")
            ts.append(float(t))
            vs.append(float(v))
        except ValueError:
            raise argparse.ArgumentTypeError(f"samples are time:value pairs, got {item!r}") from None
    return ts, vs


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a JSON report document")
    common.add_argument("--config", help="configuration file (key = value lines)")
    common.add_argument("--hbar", type=float, help="override the configured hbar")

    top = _Parser(prog="dqengine", description="Phase-space quantum mechanics toolkit.")
    top.add_argument("--version", action="version", version=f"dqengine {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("star-product", parents=[common], help="star product of two expressions")
    sp.add_argument("--statistics", choices=["bose", "fermi"], required=True)
    sp.add_argument("a")
    sp.add_argument("b")

    se = sub.add_parser("star-exp", parents=[common], help="star exponential at a point or as a symbol")
    se.add_argument("--system", choices=["ho", "quadratic", "fermi-ho", "fermi-driven"], required=True)
    se.add_argument("--scheme", choices=["closed", "propagator", "naive", "meticulous"], required=True)
    se.add_argument("--omega", type=float, default=1.0)
    se.add_argument("--m", type=float, default=1.0)
    se.add_argument("--g", type=float, default=0.0)
    when = se.add_mutually_exclusive_group(required=True)
    when.add_argument("--t", type=float)
    when.add_argument("--tau", type=float, help="imaginary time, t = -i tau")
    se.add_argument("--point", type=_pair, default=(0.0, 0.0), help="q,p")
    _coefficient_args(se)
    se.add_argument("--expansion", choices=["linear", "exact"], default="linear")

    ge = sub.add_parser("ground-energy", parents=[common], help="Feynman-Kac ground-state energy")
    ge.add_argument("--system", choices=["ho", "quadratic", "fermi-ho", "fermi-driven"], required=True)
    ge.add_argument("--omega", type=float, default=1.0)
    ge.add_argument("--a", type=float, default=1.0)
    ge.add_argument("--b", type=float, default=1.0)
    ge.add_argument("--c", type=float, default=0.0)
    ge.add_argument("--g", type=float, default=0.0)
    ge.add_argument("--scheme", choices=["naive", "meticulous"], default="naive")
    ge.add_argument("--schedule", type=_schedule, help="tau0,growth,max_steps,tol[,min_tau]")

    pr = sub.add_parser("propagator", parents=[common], help="propagator between endpoints")
    pr.add_argument("--system", choices=["ho", "quadratic", "fermi-ho", "fermi-driven"], required=True)
    pr.add_argument("--endpoints", type=_pair, default=(0.0, 0.0), help="x_f,x_0")
    pr.add_argument("--t", type=float, required=True)
    pr.add_argument("--omega", type=float, default=1.0)
    pr.add_argument("--m", type=float, default=1.0)
    pr.add_argument("--basis", choices=["naive", "meticulous"], default="meticulous")
    pr.add_argument("--expansion", choices=["linear", "exact"], default="exact")
    _coefficient_args(pr)

    ve = sub.add_parser("verify", parents=[common], help="run the invariant suites")
    ve.add_argument("--suite", choices=["all", *SUITE_NAMES], default="all")
    return top


def _coefficient_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--c-expr", help="c(t) as an expression in t (quadratic system)")
    p.add_argument("--f-expr", help="f(t) as an expression in t (quadratic system)")
    p.add_argument("--c-samples", type=_samples, help="c(t) as t:v,t:v,... samples")
    p.add_argument("--f-samples", type=_samples, help="f(t) as t:v,t:v,... samples")


# -- commands -------------------------------------------------------------------


def _coefficient(expr, samples, hbar, default=None):
    if expr is not None and samples is not None:
        raise UsageError("give either an expression or samples, not both")
    if expr is not None:
        return time_function(expr, hbar)
    if samples is not None:
        return tabulated(*samples)
    return default


def _quadratic_spec(args, hbar: float) -> BosonicPropagatorSpec:
    k = args.m * args.omega**2
    c = _coefficient(args.c_expr, args.c_samples, hbar, lambda t: k)
    f = _coefficient(args.f_expr, args.f_samples, hbar)
    return BosonicPropagatorSpec("quadratic", args.m, args.omega, c, f, hbar)


def _cmd_star_product(args, cfg: Config, hbar: float) -> dict:
    a, b = parse(args.a), parse(args.b)
    if args.statistics == "bose":
        value = moyal_star(elaborate(a, "bose"), elaborate(b, "bose")).to_string(decimal=True)
        route = "moyal series, exact rational arithmetic"
    else:
        space = fermi_space_for(a, b, hbar=hbar)
        fa, fb = elaborate(a, "fermi", space=space), elaborate(b, "fermi", space=space)
        value = str(fermi_star(space, fa, fb).chop())
        route = "fermionic nested-pair series"
    return {"results": [_result("star-product", value, 0.0, route)]}


def _fermi_time(args):
    return complex(0.0, -args.tau) if args.tau is not None else args.t


def _cmd_star_exp(args, cfg: Config, hbar: float) -> dict:
    q, p = args.point
    system, scheme = args.system, args.scheme
    if system in ("ho", "quadratic"):
        if scheme not in ("closed", "propagator"):
            raise UsageError(f"--scheme {scheme} applies to fermionic systems")
        if system == "ho" and scheme == "closed":
            if args.tau is not None:
                value = ho_star_exp_wick(args.omega, q, p, args.tau, hbar, args.m)
            else:
                value = ho_star_exp_closed(args.omega, q, p, args.t, hbar, args.m)
            return {"results": [_result("star-exp", value, 1e-12, "closed form")]}
        if args.tau is not None:
            raise UsageError("the propagator route takes real --t")
        if system == "ho":
            spec = BosonicPropagatorSpec("ho", args.m, args.omega, hbar=hbar)
        elif scheme == "closed":
            raise UsageError("the quadratic system has no closed form here; use --scheme propagator")
        else:
            spec = _quadratic_spec(args, hbar)
        res = star_exp_from_propagator_bosonic(spec, q, p, args.t)
        return {"results": [_result("star-exp", res.value, 1e-9, "propagator transform")]}
    if scheme not in (NAIVE, METICULOUS):
        raise UsageError("fermionic systems take --scheme naive or meticulous")
    t = _fermi_time(args)
    if system == "fermi-ho":
        K = fermi_ho_propagator(args.omega, t, scheme, hbar)
    else:
        K = fermi_driven_propagator(args.omega, t, hbar, scheme, args.expansion)
    S = fermi_star_exp_naive(K, hbar) if scheme == NAIVE else fermi_star_exp_meticulous(K, hbar)
    return {
        "results": [
            _result("star-exp", str(S.element.chop()), 1e-12, f"{scheme} Berezin transform"),
            _result("parity", S.parity, 0.0, "parity checker"),
        ]
    }


def _schedule_from(args, base: Schedule) -> Schedule:
    if args.schedule is None:
        return base
    tau0, growth, steps, tol, *rest = args.schedule
    return Schedule(tau0, growth, int(steps), tol, True, rest[0] if rest else base.min_tau)


def _cmd_ground_energy(args, cfg: Config, hbar: float) -> dict:
    if args.system == "ho":
        sched = _schedule_from(args, cfg.schedule())
        Z = TraceFunction(lambda tau: fk_trace_ho(args.omega, tau, hbar))
    elif args.system == "quadratic":
        sched = _schedule_from(args, cfg.schedule())
        Z = TraceFunction(lambda tau: fk_trace_quadratic(args.a, args.b, args.c, tau, hbar))
    else:
        sched = _schedule_from(args, cfg.fermi_schedule())
        system = "ho" if args.system == "fermi-ho" else "driven"
        est = fermi_ground_energy(system, args.scheme, args.omega, args.g, hbar, sched)
        return _energy_results(est, sched, f"Wick-rotated {args.scheme} trace, secant slopes")
    est = ground_energy_limit(Z, hbar, sched)
    return _energy_results(est, sched, "Wick-rotated trace, secant slopes")


def _energy_results(est, sched: Schedule, route: str) -> dict:
    return {
        "results": [_result("E0", est.value, sched.tol, route)],
        "diagnostics": {"converged": est.converged, "tau_final": est.taus[-1], "slopes": est.estimates},
    }


def _cmd_propagator(args, cfg: Config, hbar: float) -> dict:
    xf, x0 = args.endpoints
    if args.system == "ho":
        value = ho_propagator(args.m, args.omega, xf, x0, args.t, hbar)
        return {"results": [_result("K", value, 1e-12, "closed form")]}
    if args.system == "quadratic":
        res = quadratic_propagator(_quadratic_spec(args, hbar), xf, args.t, x0)
        return {
            "results": [
                _result("K", res.amplitude, 1e-8, "RK4 Jacobi fields"),
                _result("action", res.action, 1e-8, "Simpson rule"),
                _result("maslov", res.maslov, 0.0, "sign changes of phi"),
            ]
        }
    if args.system == "fermi-ho":
        K = fermi_ho_propagator(args.omega, args.t, args.basis, hbar)
    else:
        K = fermi_driven_propagator(args.omega, args.t, hbar, args.basis, args.expansion)
    return {"results": [_result("K", str(K.element.chop()), 1e-12, "closed-form Grassmann kernel")]}


def _cmd_verify(args, cfg: Config, hbar: float) -> dict:
    names = SUITE_NAMES if args.suite == "all" else [args.suite]
    suites = run_suites(names, cfg)
    results, table = [], []
    for s in suites:
        for c in s.cases:
            prov = c.provenance or ("exact" if c.tolerance == 0 else "numerical")
            results.append(_result(f"{s.name}/{c.name}", c.value, c.tolerance, c.route, prov))
        table.append(
            {
                "name": s.name,
                "cases": len(s.cases),
                "passed": s.passed,
                "failed": s.failed,
                "failures": [{"name": c.name, "value": c.value, "detail": c.detail} for c in s.cases if not c.passed],
                "table": [{"name": c.name, "value": c.value, "passed": c.passed} for c in s.cases],
            }
        )
    return {"results": results, "suites": table}


COMMANDS = {
    "star-product": _cmd_star_product,
    "star-exp": _cmd_star_exp,
    "ground-energy": _cmd_ground_energy,
    "propagator": _cmd_propagator,
    "verify": _cmd_verify,
}


def _params(args) -> dict:
    skip = {"command", "json", "config"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def run_command(argv: Sequence[str]) -> tuple[dict, int]:
    """Run one command and return (report document, exit code).

    Usage and configuration problems raise UsageError or ConfigError;
    computation errors come back as a document with an ``error`` field.
    """
    args = build_parser().parse_args(list(argv))
    cfg = load_config(args.config)
    hbar = cfg.hbar if args.hbar is None else args.hbar
    if hbar <= 0:
        raise UsageError("hbar must be > 0")
    doc = {
        "schema_version": SCHEMA_VERSION,
        "header": {"tool": "dqengine", "version": __version__, "config": cfg.source},
        "command": args.command,
        "params": {**_params(args), "hbar": hbar},
        "results": [],
        "diagnostics": {},
        "suites": [],
    }
    code = 0
    try:
        body = COMMANDS[args.command](args, cfg, hbar)
    except (DSLError, UsageError):
        raise
    except ConvergenceError as exc:
        doc["error"] = f"{exc} (last estimate {exc.estimate.value:.10g})"
        return doc, 1
    except (ValueError, ArithmeticError, CausticError) as exc:
        doc["error"] = str(exc)
        return doc, 1
    doc["results"] = body.get("results", [])
    doc["diagnostics"] = body.get("diagnostics", {})
    doc["suites"] = body.get("suites", [])
    if args.command == "verify":
        code = 0 if all(s["failed"] == 0 for s in doc["suites"]) else 1
    return doc, code


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return _json_number(obj)


def render_json(doc: dict) -> str:
    return json.dumps(_jsonable(doc), indent=2, ensure_ascii=False)


def render_text(doc: dict) -> str:
    lines = []
    if doc["command"] == "verify":
        for s in doc["suites"]:
            lines.append(f"[{s['name']}] {s['passed']}/{s['cases']} passed")
            for row in s["table"]:
                lines.append(f"  {row['name']}: {_text_value(row['value'])} {'PASS' if row['passed'] else 'FAIL'}")
            for f in s["failures"]:
                if f["detail"]:
                    lines.append(f"  ! {f['name']}: {f['detail']}")
        total = sum(s["cases"] for s in doc["suites"])
        failed = sum(s["failed"] for s in doc["suites"])
        lines.append(f"{total - failed}/{total} checks passed")
    elif len(doc["results"]) == 1:
        lines.append(_text_value(doc["results"][0]["value"]))
    else:
        for r in doc["results"]:
            lines.append(f"{r['name']}: {_text_value(r['value'])}")
    if "error" in doc:
        lines.append(f"error: {doc['error']}")
    return "\n".join(lines)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        doc, code = run_command(argv)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except (UsageError, DSLError, ConfigError) as exc:
        print(f"dqengine: error: {exc}", file=sys.stderr)
        return 2
    as_json = "--json" in argv
    out = render_json(doc) if as_json else render_text(doc)
    stream = sys.stderr if (code and "error" in doc and not as_json) else sys.stdout
    print(out, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
