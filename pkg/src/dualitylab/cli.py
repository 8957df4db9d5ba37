"""Command-line surface.

Subcommands:

  transform   apply a transform (legendre | a | j) to a function spec
              (JSON) or to a sampled grid (CSV)
  check       order: certify a serialized corpus transform at a constant;
              ptilde: search for a two-piece cover witness for one function
  fuzz        build a seeded jittered transform over a corpus, certify it,
              classify it, and emit a report
  hyers-ulam  fit an additive approximant to approximately-additive samples
  report      re-render a stored report (text and optional plots)

Exit codes: 0 success/certified, 1 violations found (artifacts are still
written), 2 usage or input errors.  The environment variable DUALITYLAB_TOL
supplies the default for --tolerance and for --eps where not given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from .corpus import geometric_corpus
from .exceptions import (
    ClassTagError,
    ConvexityError,
    CorpusError,
    DomainError,
    DualityLabError,
    GridValidationError,
    HypothesisViolationError,
    SpecFormatError,
)
from .extremal import cover_witness_search
from .grid import read_grid_csv, write_grid_csv
from .pl import PLConvex1D
from .reporting import (
    dump_json,
    emit_plots,
    parse_corpus,
    parse_corpus_transform,
    render_report_text,
    report_to_obj,
)
from .specio import dumps_function, loads_function
from .stability import AlmostOrderConstant, analyze, fuzz_transform
from .transforms import (
    a_grid,
    gauge_grid,
    gauge_transform,
    geometric_dual,
    legendre,
    legendre_grid,
)

TOLERANCE_ENV = "DUALITYLAB_TOL"

_USAGE_ERRORS = (
    SpecFormatError,
    CorpusError,
    DomainError,
    ClassTagError,
    ConvexityError,
    GridValidationError,
)


def _env_tolerance() -> Optional[float]:
    raw = os.environ.get(TOLERANCE_ENV)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise SpecFormatError(f"{TOLERANCE_ENV} must be a number, got {raw!r}")


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecFormatError(f"cannot read {path}: {exc}") from exc


def _read_json(path: str) -> dict:
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: invalid JSON: {exc}") from exc


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _positive_ctilde(raw: str) -> AlmostOrderConstant:
    try:
        k = AlmostOrderConstant(float(raw))
    except (ValueError, ZeroDivisionError) as exc:
        raise SpecFormatError(f"--ctilde: {exc}") from exc
    return k


def _cmd_transform(args) -> int:
    grid_mode = args.infile.lower().endswith(".csv")
    if grid_mode:
        if not args.out:
            raise SpecFormatError("grid transforms need --out for the CSV result")
        f = read_grid_csv(args.infile)
        op = {"legendre": legendre_grid, "a": a_grid, "j": gauge_grid}[args.op]
        write_grid_csv(op(f), args.out)
        return 0
    f = loads_function(_read_text(args.infile))
    if not isinstance(f, PLConvex1D):
        raise SpecFormatError("transforms apply to 1-d function specs")
    op = {"legendre": legendre, "a": geometric_dual, "j": gauge_transform}[args.op]
    text = dumps_function(op(f)) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_check(args) -> int:
    if args.mode == "order":
        t = parse_corpus_transform(_read_json(args.transform))
        k = _positive_ctilde(args.ctilde)
        report = analyze(t, k)
        obj = report_to_obj(report)
        sys.stdout.write(render_report_text(obj))
        return 0 if obj["certified"] else 1
    # ptilde: two-piece cover witness search
    f = loads_function(_read_text(args.infile))
    if not isinstance(f, PLConvex1D):
        raise SpecFormatError("the witness search applies to 1-d function specs")
    k = _positive_ctilde(args.ctilde)
    pair = cover_witness_search(f, k.ctilde)
    if pair is None:
        sys.stdout.write("relative-P̃: pass\n")
        return 0
    sys.stdout.write("witness found: covered but neither piece dominates\n")
    sys.stdout.write("  g: " + dumps_function(pair.g) + "\n")
    sys.stdout.write("  h: " + dumps_function(pair.h) + "\n")
    return 1


def _load_corpus(spec: str):
    if spec == "geometric":
        return geometric_corpus()
    return parse_corpus(_read_json(spec))


def _cmd_fuzz(args) -> int:
    k = _positive_ctilde(args.ctilde)
    corpus = _load_corpus(args.corpus)
    tol = args.tolerance if args.tolerance is not None else (_env_tolerance() or 1e-6)
    t = fuzz_transform(seed=args.seed, k=k, base=args.base, corpus=corpus)
    report = analyze(t, k, exponent_tolerance=tol)
    obj = report_to_obj(report)
    sys.stdout.write(render_report_text(obj))
    if args.report:
        _write_text(args.report, dump_json(obj))
    if args.emit_plots:
        for path in emit_plots(obj, args.emit_plots):
            sys.stdout.write(f"wrote {path}\n")
    return 0 if obj["certified"] else 1


def _cmd_hyers_ulam(args) -> int:
    from .stability import hyers_ulam_approx

    obj = _read_json(args.infile)
    try:
        samples = [(float(x), float(v)) for x, v in obj["samples"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecFormatError(f"samples must be a list of [x, f(x)] pairs: {exc}")
    eps = args.eps
    if eps is None:
        eps = obj.get("eps")
    if eps is None:
        eps = _env_tolerance()
    if eps is None:
        raise SpecFormatError("no eps given (flag, file field, or DUALITYLAB_TOL)")
    eps = float(eps)
    try:
        g, sup_error = hyers_ulam_approx(samples, eps)
    except HypothesisViolationError as exc:
        sys.stdout.write(f"additive hypothesis fails: {exc}\n")
        return 1
    sys.stdout.write(f"sup |f - g| = {sup_error!r} <= eps = {eps!r}\n")
    if args.out:
        out = {
            "kind": "additive-approximation",
            "eps": eps,
            "sup_error": sup_error,
            "additive": [[x, g[x]] for x in sorted(g)],
        }
        _write_text(args.out, dump_json(out))
    return 0


def _cmd_report(args) -> int:
    obj = _read_json(args.infile)
    if obj.get("kind") != "stability-report":
        raise SpecFormatError("input is not a stability report")
    sys.stdout.write(render_report_text(obj))
    if args.emit_plots:
        for path in emit_plots(obj, args.emit_plots):
            sys.stdout.write(f"wrote {path}\n")
    return 0 if obj.get("certified") else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dualitylab",
        description="exact 1-d convex duality calculus and stability harness",
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    tr = sub.add_parser("transform", help="apply legendre | a | j to a spec")
    tr.add_argument("--op", required=True, choices=("legendre", "a", "j"))
    tr.add_argument("--in", dest="infile", required=True,
                    help="function spec JSON, or grid CSV")
    tr.add_argument("--out", help="output path (required for grid CSV input)")
    tr.set_defaults(func=_cmd_transform)

    ck = sub.add_parser("check", help="certify order conditions or search witnesses")
    ck_sub = ck.add_subparsers(dest="mode", required=True)
    order = ck_sub.add_parser("order", help="certify a serialized corpus transform")
    order.add_argument("--transform", required=True, help="corpus-transform JSON")
    order.add_argument("--ctilde", required=True)
    order.set_defaults(func=_cmd_check, mode="order")
    pt = ck_sub.add_parser("ptilde", help="two-piece cover witness search")
    pt.add_argument("--in", dest="infile", required=True)
    pt.add_argument("--ctilde", required=True)
    pt.set_defaults(func=_cmd_check, mode="ptilde")

    fz = sub.add_parser("fuzz", help="seeded jittered transform + certification")
    fz.add_argument("--base", required=True,
                    choices=("identity", "gauge", "legendre", "a"))
    fz.add_argument("--ctilde", required=True)
    fz.add_argument("--seed", required=True, type=int)
    fz.add_argument("--corpus", default="geometric",
                    help="'geometric' or a corpus JSON path")
    fz.add_argument("--report", help="write the report JSON here")
    fz.add_argument("--emit-plots", dest="emit_plots",
                    help="directory for CSV/SVG plot artifacts")
    fz.add_argument("--tolerance", type=float,
                    help="exponent grid-snap tolerance "
                         f"(default: ${TOLERANCE_ENV} or 1e-6)")
    fz.set_defaults(func=_cmd_fuzz)

    hu = sub.add_parser("hyers-ulam", help="additive approximation of samples")
    hu.add_argument("--in", dest="infile", required=True,
                    help='JSON with {"samples": [[x, f(x)], ...]}')
    hu.add_argument("--eps", type=float,
                    help=f"defect bound (default: file field or ${TOLERANCE_ENV})")
    hu.add_argument("--out", help="write the approximant JSON here")
    hu.set_defaults(func=_cmd_hyers_ulam)

    rp = sub.add_parser("report", help="re-render a stored report")
    rp.add_argument("--in", dest="infile", required=True)
    rp.add_argument("--emit-plots", dest="emit_plots")
    rp.set_defaults(func=_cmd_report)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
