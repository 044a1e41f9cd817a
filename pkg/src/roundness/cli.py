"""Command-line driver: ``roundness <command> [options]``.

Every command writes a CSV table (header plus rows, 17 significant digits) to
stdout and, with ``--csv PATH``, to a file. Exit codes: 0 success, 2 usage
error, 3 unparseable input, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import metric as _metric
from . import moduli as _moduli
from .errors import EvaluationError, InvalidParameterError, MetricValidationError, NonIntegrableError, SpecParseError
from .search import SearchBudget
from .specio import dump_spec, read_spec
from .svg import line_chart

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 2, 3, 4


class UsageError(Exception):
    pass


def parse_range(text: str) -> List[float]:
    """``a:b:step`` (inclusive of ``b`` up to rounding), a single number, or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"range must be a:b:step, got {text!r}")
            a, b, step = (float(s) for s in parts)
            if not step > 0:
                raise UsageError("range step must be positive")
            if b < a:
                raise UsageError(f"empty range {text!r}")
            count = int(math.floor((b - a) / step + 1e-9)) + 1
            return [a + k * step for k in range(count)]
        values = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"cannot read range {text!r}") from None
    if not values:
        raise UsageError("empty range")
    return values


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _emit(args, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.csv:
        Path(args.csv).write_text(text)


def _svg(args, x, series, xlabel, ylabel):
    if args.svg:
        Path(args.svg).write_text(line_chart(x, series, xlabel=xlabel, ylabel=ylabel))


def _budget(args) -> SearchBudget:
    return SearchBudget(starts=args.budget_starts, refine_steps=args.budget_steps, seed=args.seed)


def _space(args):
    if not args.space:
        raise UsageError("--space is required")
    return read_spec(args.space)


def _need(args, name):
    v = getattr(args, name)
    if v is None:
        raise UsageError(f"--{name} is required")
    return parse_range(v)


def cmd_nu_curve(args):
    space = _space(args)
    ps = _need(args, "p")
    b = _budget(args)
    rows = []
    for p in ps:
        s = _moduli.nu_estimate(space, p, b, workers=args.workers)
        lo, hi = _moduli.nu_bounds(p)
        rows.append((p, s.value, lo, hi))
    _emit(args, ("p", "nu", "lower_bound", "upper_bound"), rows)
    _svg(args, ps, [("nu estimate", [r[1] for r in rows]), ("max(2, 2^(p-1))", [r[2] for r in rows]),
                    ("2^p", [r[3] for r in rows])], "p", "nu(p)")


def _bracket_row(res):
    if isinstance(res, _moduli.AtLeast):
        return (str(res), math.inf, False, False)
    return (res.lo, res.hi, res.verdict_lo, res.verdict_hi)


def cmd_mr(args):
    res = _moduli.mr_estimate(_space(args), args.tol or 5e-3, _budget(args), workers=args.workers)
    _emit(args, ("lo", "hi", "verdict_lo", "verdict_hi"), [_bracket_row(res)])


def cmd_mc(args):
    res = _moduli.mc_estimate(_space(args), args.pmax if args.pmax is not None else 16.0, args.tol or 5e-3,
                              _budget(args), workers=args.workers)
    _emit(args, ("lo", "hi", "verdict_lo", "verdict_hi"), [_bracket_row(res)])


def cmd_mgr(args):
    if not args.metric:
        raise UsageError("--metric is required")
    m = _metric.read_metric_csv(args.metric)
    res = _metric.sanchez_mgr(m, args.pmax if args.pmax is not None else 20.0, args.grid_step, args.tol or 1e-9)
    sys.stdout.write("value,root_source,bracket_width\n" + res.csv_row() + "\n")
    if args.csv:
        Path(args.csv).write_text("value,root_source,bracket_width\n" + res.csv_row() + "\n")


def _sweep(args, name, values, fn, column, label):
    rows = [(v, fn(v).value) for v in values]
    _emit(args, (name, column), rows)
    _svg(args, values, [(label, [r[1] for r in rows])], name, column)


def cmd_rho(args):
    space, b = _space(args), _budget(args)
    _sweep(args, "t", _need(args, "t"), lambda t: _moduli.rho_estimate(space, t, b, workers=args.workers),
           "rho", "rho estimate")


def cmd_delta(args):
    space, b = _space(args), _budget(args)
    _sweep(args, "eps", _need(args, "eps"), lambda e: _moduli.delta_estimate(space, e, b, workers=args.workers),
           "delta", "delta estimate")


def cmd_clarkson(args):
    space, b = _space(args), _budget(args)
    _sweep(args, "p", _need(args, "p"), lambda p: _moduli.clarkson_ratio(space, p, b, workers=args.workers),
           "ratio", "Clarkson ratio")


def cmd_frechet(args):
    space = _space(args)
    if args.x is None or args.y is None:
        raise UsageError("--x and --y are required")
    x, y = parse_range(args.x), parse_range(args.y)
    grid = sorted(parse_range(args.t), reverse=True) if args.t else None
    r = _moduli.frechet_exponent(space, x, y, grid)
    _emit(args, ("exponent", "derivative", "ambiguous", "degenerate"),
          [(r.exponent, r.derivative, r.ambiguous, r.degenerate)])


COMMANDS = {
    "nu-curve": (cmd_nu_curve, "sweep nu(p) with its a-priori bounds"),
    "mr": (cmd_mr, "bracket the maximal roundness"),
    "mc": (cmd_mc, "bracket the minimal coroundness"),
    "mgr": (cmd_mgr, "maximal generalised roundness of a finite metric (CSV distance table)"),
    "rho": (cmd_rho, "sweep the modulus of smoothness over --t"),
    "delta": (cmd_delta, "sweep the modulus of convexity over --eps"),
    "clarkson": (cmd_clarkson, "sweep the Clarkson ratio over --p"),
    "frechet": (cmd_frechet, "fit the remainder exponent of ||x + t y|| at x in direction y"),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="roundness", description="Roundness moduli of finite-dimensional spaces.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--space", help="space spec file")
        sp.add_argument("--metric", help="CSV distance table")
        sp.add_argument("--p", help="exponent range a:b:step")
        sp.add_argument("--t", help="range a:b:step (frechet: comma list of decreasing t)")
        sp.add_argument("--eps", help="range a:b:step")
        sp.add_argument("--x", help="comma-separated vector (frechet)")
        sp.add_argument("--y", help="comma-separated vector (frechet)")
        sp.add_argument("--budget-starts", type=int, default=256)
        sp.add_argument("--budget-steps", type=int, default=60)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--pmax", type=float)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--grid-step", type=float, default=0.01)
        sp.add_argument("--csv", metavar="PATH")
        sp.add_argument("--svg", metavar="PATH")
        sp.add_argument("--dump-spec", action="store_true", help="print the parsed space spec and exit")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.dump_spec:
            sys.stdout.write(dump_spec(_space(args)))
            return EXIT_OK
        COMMANDS[args.command][0](args)
    except UsageError as exc:
        print(f"roundness: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecParseError, MetricValidationError, OSError) as exc:
        print(f"roundness: cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InvalidParameterError as exc:
        print(f"roundness: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EvaluationError, NonIntegrableError, ArithmeticError) as exc:
        print(f"roundness: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
