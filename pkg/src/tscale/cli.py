"""Command-line front end.

Three subcommands:

  calc      point operations on one scale, rows of "t,value" on stdout
  verify    run a batch of seeded bound checks from a JSON config
  converge  halve a dense mesh four times and report observed error orders

Exit codes: 0 success, 1 verify found a bound violation, 2 bad
configuration, 3 domain or regressivity failure.  Logging verbosity comes
from the TSCALE_LOG environment variable (error, info, debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bounds import BoundCase, ExponentVariant
from .config import FnSpec, ScaleSpec, classical_forms, parse_fn, parse_scale
from .core import GridFn1, cauchy_integral, delta_derivative, dense_mesh
from .errors import ConfigError, DomainError
from .exponential import comparison_bound, exp_fn
from .verify import InstanceSpec, WitnessMode, run_verification

log = logging.getLogger(__name__)

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def fmt_number(x: float) -> str:
    """Shortest decimal that round-trips to the same float; 6.0 prints as 6."""
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _print_rows(points: np.ndarray, values: np.ndarray) -> None:
    print("t,value")
    for t, v in zip(points, values):
        print(f"{fmt_number(t)},{fmt_number(v)}")


def _cmd_calc(args: argparse.Namespace) -> int:
    scale = parse_scale(args.scale).build()
    op = args.operation
    if op == "sigma":
        idx = [scale.sigma(i) for i in range(len(scale))]
        _print_rows(scale.points, scale.points[idx])
        return 0
    if op == "mu":
        _print_rows(scale.points, scale.graininess)
        return 0
    if op == "compare":
        f = _fixed_fn(args.f, scale)
        g = _fixed_fn(args.g, scale)
        a = scale.locate(args.lower)
        out = comparison_bound(args.xa, f, g, a)
        _print_rows(out.scale.points, out.values)
        return 0
    f = _fixed_fn(args.fn, scale)
    if op == "dderiv":
        out = delta_derivative(f)
        _print_rows(out.scale.points, out.values)
        return 0
    if op == "dint":
        a = scale.locate(args.lower)
        b = scale.locate(args.upper)
        print(fmt_number(cauchy_integral(f, a, b)))
        return 0
    if op == "exp":
        t0 = scale.locate(args.t0)
        out = exp_fn(f, t0)
        _print_rows(out.scale.points, out.values)
        return 0
    raise ConfigError(f"unknown calc operation '{op}'")


def _fixed_fn(text: str, scale) -> GridFn1:
    from .config import realize_1d
    return realize_1d(parse_fn(text), scale)


@dataclass(frozen=True)
class ScenarioConfig:
    """Parsed verify config: the instance batch plus output disposition."""

    instance: InstanceSpec
    output_path: str
    output_format: str
    variant_mode: str

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioConfig":
        if not isinstance(obj, dict):
            raise ConfigError("verify config must be a JSON object")
        case_name = obj.get("theorem")
        try:
            case = BoundCase(case_name)
        except ValueError:
            raise ConfigError(
                f"'theorem' must be one of "
                f"{', '.join(c.value for c in BoundCase)}; got {case_name!r}") from None
        for key in ("scale1", "scale2"):
            if key not in obj:
                raise ConfigError(f"verify config needs '{key}'")
        functions = {name: parse_fn(fn)
                     for name, fn in (obj.get("functions") or {}).items()}
        mode_name = obj.get("witness_mode", "equality")
        try:
            mode = WitnessMode(mode_name)
        except ValueError:
            raise ConfigError(
                f"'witness_mode' must be equality or strict_slack; "
                f"got {mode_name!r}") from None
        variant_mode = obj.get("exponent_variant", "first")
        if variant_mode not in ("first", "second", "both"):
            raise ConfigError("'exponent_variant' must be first, second, or both")
        primary = ExponentVariant.SECOND_VARIABLE if variant_mode == "second" \
            else ExponentVariant.FIRST_VARIABLE
        count = obj.get("count", 1)
        if not isinstance(count, int) or isinstance(count, bool):
            raise ConfigError("'count' must be an integer")
        seed = obj.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("'seed' must be an integer")
        out = obj.get("output") or {}
        path = out.get("path")
        if not path:
            raise ConfigError("verify config needs output.path")
        fmt = out.get("format", "csv")
        if fmt not in ("csv", "json"):
            raise ConfigError("output.format must be csv or json")
        instance = InstanceSpec(
            case=case,
            scale1=parse_scale(obj["scale1"]),
            scale2=parse_scale(obj["scale2"]),
            functions=functions,
            rng_seed=seed,
            count=count,
            witness_mode=mode,
            exponent_variant=primary,
        )
        return cls(instance=instance, output_path=str(path),
                   output_format=fmt, variant_mode=variant_mode)


def _point_rows(reports) -> list[tuple[float, float, float, float, float]]:
    rows = []
    for report in reports:
        dom = report.bound.domain
        w = report.witness
        for i in range(dom.shape[0]):
            for j in range(dom.shape[1]):
                b = float(report.bound.values[i, j])
                wv = float(w.values[i, j]) if w is not None else math.nan
                rows.append((float(dom.scale1.points[i]),
                             float(dom.scale2.points[j]), wv, b, b - wv))
    return rows


def _stem(path: str) -> Path:
    p = Path(path)
    if p.suffix in (".csv", ".json"):
        p = p.with_suffix("")
    return p


def _cmd_verify(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    scenario = ScenarioConfig.from_dict(raw)

    started = time.monotonic()
    summary = run_verification(scenario.instance)
    elapsed = time.monotonic() - started
    rows = _point_rows(summary.reports)
    payload = summary.to_dict()
    payload["theorem"] = scenario.instance.case.value
    payload["seed"] = scenario.instance.rng_seed
    payload["witness_mode"] = scenario.instance.witness_mode.value
    payload["exponent_variant"] = scenario.variant_mode
    payload["scale1"] = scenario.instance.scale1.describe()
    payload["scale2"] = scenario.instance.scale2.describe()

    stem = _stem(scenario.output_path)
    stem.parent.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        if scenario.output_format == "csv":
            csv_path = stem.with_suffix(".csv")
            written.append(csv_path)
            with open(csv_path, "w", encoding="utf-8") as fh:
                fh.write("t1,t2,witness,bound,slack\n")
                for row in rows:
                    fh.write(",".join(fmt_number(x) for x in row) + "\n")
            json_path = stem.with_suffix(".json")
            written.append(json_path)
            with open(json_path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        else:
            payload["points"] = [
                {"t1": r[0], "t2": r[1], "witness": r[2], "bound": r[3],
                 "slack": r[4]} for r in rows]
            json_path = stem.with_suffix(".json")
            written.append(json_path)
            with open(json_path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    log.info("verified %d instances in %.3f s; wrote %s",
             summary.instances_run, elapsed,
             ", ".join(str(p) for p in written))
    if summary.instances_with_violation:
        log.error("bound violated in %d of %d instances (worst relative excess %g)",
                  summary.instances_with_violation, summary.instances_run,
                  summary.worst_relative_violation)
        return 1
    return 0


def _cmd_converge(args: argparse.Namespace) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("converge config must be a JSON object")
    op = raw.get("operation")
    if op not in ("dderiv", "exp"):
        raise ConfigError("operation must be dderiv or exp")
    spec = parse_scale(raw.get("scale") or {})
    if spec.kind != "dense_mesh":
        raise ConfigError("convergence study needs a dense_mesh scale")
    start, end, h0 = spec.start, spec.end, spec.h
    spec.build()
    fn = parse_fn(raw.get("function") or {})
    out = raw.get("output") or {}
    path = out.get("path")
    if not path:
        raise ConfigError("converge config needs output.path")

    if op == "exp":
        if fn.family != "constant" or fn.value is None:
            raise ConfigError("exp convergence needs a constant coefficient")
        rate = float(fn.value)
    else:
        f, fprime = classical_forms(fn)

    rows: list[tuple[float, float, float | None]] = []
    prev_err: float | None = None
    for level in range(4):
        hk = h0 / 2 ** level
        mesh = dense_mesh(start, end, hk)
        if op == "dderiv":
            g = GridFn1.from_function(mesh, f)
            approx = delta_derivative(g).values
            ref = np.array([fprime(t) for t in mesh.points[:-1]])
        else:
            coeff = GridFn1(mesh, np.full(len(mesh), rate))
            approx = exp_fn(coeff, 0).values
            ref = np.exp(rate * (mesh.points - mesh.points[0]))
        err = float(np.abs(approx - ref).max())
        order: float | None = None
        if prev_err is not None and err > 0.0 and prev_err > 0.0:
            order = math.log2(prev_err / err)
        rows.append((hk, err, order))
        prev_err = err

    csv_path = _stem(path).with_suffix(".csv")
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("h,max_error,observed_order\n")
            for hk, err, order in rows:
                tail = "" if order is None else fmt_number(order)
                fh.write(f"{fmt_number(hk)},{fmt_number(err)},{tail}\n")
    except BaseException:
        csv_path.unlink(missing_ok=True)
        raise
    log.info("wrote %s", csv_path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tscale",
        description="Time-scale calculus toolkit: point calculus, "
                    "integral-inequality verification, mesh convergence.")
    sub = parser.add_subparsers(dest="command", required=True)

    calc = sub.add_parser("calc", help="evaluate one operation on a scale")
    calc.add_argument("operation",
                      choices=("sigma", "mu", "dderiv", "dint", "exp", "compare"))
    calc.add_argument("--scale", required=True,
                      help="integer:A..B | h:H,A..B | q:Q,N | explicit:p1,p2,... "
                           "| dense:H,A..B")
    calc.add_argument("--fn", help="const:c | poly:c0,c1,... | exp:A,R | sin:W "
                                   "| table:v1,v2,...")
    calc.add_argument("--f", help="forcing term for compare")
    calc.add_argument("--g", help="coefficient for compare")
    calc.add_argument("--from", dest="lower", type=float,
                      help="lower limit (a point of the scale)")
    calc.add_argument("--to", dest="upper", type=float,
                      help="upper limit (a point of the scale)")
    calc.add_argument("--t0", type=float, default=None,
                      help="anchor point for exp")
    calc.add_argument("--xa", type=float, default=0.0,
                      help="initial value for compare")
    calc.set_defaults(handler=_cmd_calc)

    verify = sub.add_parser("verify", help="run seeded bound checks from a config")
    verify.add_argument("config", help="path to a JSON scenario config")
    verify.set_defaults(handler=_cmd_verify)

    conv = sub.add_parser("converge",
                          help="halve a dense mesh and report error orders")
    conv.add_argument("config", help="path to a JSON study config")
    conv.set_defaults(handler=_cmd_converge)
    return parser


def _check_calc_args(args: argparse.Namespace) -> None:
    op = args.operation
    if op in ("dderiv", "dint", "exp") and not args.fn:
        raise ConfigError(f"calc {op} needs --fn")
    if op == "dint" and (args.lower is None or args.upper is None):
        raise ConfigError("calc dint needs --from and --to")
    if op == "exp" and args.t0 is None:
        raise ConfigError("calc exp needs --t0")
    if op == "compare" and (not args.f or not args.g or args.lower is None):
        raise ConfigError("calc compare needs --f, --g and --from")


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("TSCALE_LOG", "error").strip().lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.ERROR),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "calc":
            _check_calc_args(args)
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
