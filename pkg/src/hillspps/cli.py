"""Command-line interface: discriminant curves, eigenvalue tables, bands, Bloch data, Darboux partner.

Tables go to stdout as CSV (``#``-prefixed metadata lines, then a header
row) or, with ``--json``, as JSON.  Stage timings go to stderr so stdout is
byte-identical across runs.

Exit codes: 0 success, 1 usage error, 2 numerical budget or validation failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import darboux, spectrum
from .estimator import HillDiscriminant
from .exceptions import (DegenerateError, NearZeroDivisorError, NoSignChangeError, NotBandEdgeError,
                         OracleError, ProblemError, SeriesBudgetError, VerificationError)
from .problems import DEFAULT_POINTS, free_problem, load_config, mathieu
from .spps import DEFAULT_ORDER

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
#: the darboux command fails above this discriminant mismatch
DARBOUX_TOL = 1e-5
DARBOUX_PROBES = 50
NUMERIC_ERRORS = (SeriesBudgetError, NoSignChangeError, VerificationError, NearZeroDivisorError,
                  DegenerateError, NotBandEdgeError, OracleError, ArithmeticError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    return f"{float(x):.15g}"


def _range(text: str):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from exc
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def _odd_grid(text: str) -> int:
    n = int(text)
    if n < 3 or n % 2 == 0:
        raise argparse.ArgumentTypeError("--grid must be an odd integer >= 3")
    return n


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    which = common.add_mutually_exclusive_group(required=True)
    which.add_argument("--mathieu", type=float, metavar="R", help="Mathieu problem q = 2R cos 2x, T = pi")
    which.add_argument("--free", action="store_true", help="p = 1, q = 0, T = pi")
    which.add_argument("--config", metavar="PATH", help="YAML problem file")
    common.add_argument("--grid", type=_odd_grid, default=DEFAULT_POINTS, help="grid nodes (odd)")
    common.add_argument("--order", type=_positive, default=DEFAULT_ORDER, help="series order N")
    common.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hillspps", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common()

    p = sub.add_parser("discriminant", parents=[common], help="sample D_N(lambda)")
    p.add_argument("--range", type=_range, required=True, metavar="LO:HI")
    p.add_argument("--samples", type=_positive, default=1000)

    p = sub.add_parser("eigenvalues", parents=[common], help="periodic/antiperiodic eigenvalues")
    p.add_argument("--count", type=_positive, default=5)

    p = sub.add_parser("bands", parents=[common], help="stable and unstable intervals")
    p.add_argument("--range", type=_range, required=True, metavar="LO:HI")

    p = sub.add_parser("bloch", parents=[common], help="Bloch solutions f+- on [0, xmax]")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--xmax", type=float, required=True)
    p.add_argument("--samples", type=_positive, default=1000)

    sub.add_parser("darboux", parents=[common], help="SUSY partner and invariance check")
    return parser


def _join_negative_values(argv):
    """Glue ``--range -1:26`` into ``--range=-1:26`` (argparse reads ``-1:26`` as an option)."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--range", "--lambda", "--mathieu", "--xmax"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def _problem(args):
    try:
        if args.free:
            return free_problem(args.grid)
        if args.config is not None:
            return load_config(args.config, args.grid)
        return mathieu(args.mathieu, args.grid)
    except OSError as exc:
        raise UsageError(f"cannot read {args.config}: {exc}") from exc
    except ProblemError as exc:
        raise UsageError(str(exc)) from exc


class Report:
    """Metadata header and stage timings for one run."""

    def __init__(self, args):
        self.problem = None
        self.params = {"order": args.order, "grid": args.grid}
        self.meta = {}
        self.timings = {}
        self.warnings = []

    def bind(self, problem):
        self.problem = problem.name
        self.meta = {"problem": problem.name, "period": fmt(problem.period), **self.params}

    def stage(self, name, seconds):
        self.timings[name] = seconds

    def header(self, out):
        for k, v in self.meta.items():
            out.write(f"# {k}: {v}\n")
        for w in self.warnings:
            out.write(f"# warning: {w}\n")

    def flush_timings(self):
        for k, v in self.timings.items():
            sys.stderr.write(f"timing {k}: {v:.3f} s\n")


def _fit(args, report):
    problem = _problem(args)
    report.bind(problem)
    est = HillDiscriminant(order=args.order).fit(problem)
    for k, v in est.timings_.items():
        report.stage(k, v)
    report.meta["lambda_center"] = fmt(est.lambda0_)
    return est


def _emit_csv(out, report, columns, rows):
    report.header(out)
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def _emit_json(out, obj):
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_discriminant(args, report, out):
    est = _fit(args, report)
    lo, hi = args.range
    lam = np.linspace(lo, hi, args.samples)
    t = time.perf_counter()
    d = est.predict(lam)
    report.stage("evaluate", time.perf_counter() - t)
    if args.json:
        _emit_json(out, {"problem": report.problem, "params": report.params,
                         "lambda_center": est.lambda0_, "lambda": lam.tolist(), "D": d.tolist()})
    else:
        _emit_csv(out, report, ["lambda", "D"], zip(lam, d))
    return EXIT_OK


def _eigen_rows(est, eigs):
    return [(e.index, e.value, e.boundary, abs(est.series_(e.value) - e.level)) for e in eigs]


def _print_eigen(args, report, out, rows):
    if args.json:
        _emit_json(out, [{"problem": report.problem, "params": report.params, "n": n, "lambda": v,
                          "boundary": b, "residual": r} for n, v, b, r in rows])
    else:
        _emit_csv(out, report, ["n", "lambda", "boundary", "residual"],
                  [(str(n), v, b, r) for n, v, b, r in rows])


def cmd_eigenvalues(args, report, out):
    est = _fit(args, report)
    t = time.perf_counter()
    try:
        eigs = est.eigenvalues(args.count)
    except SeriesBudgetError as exc:
        report.warnings.append(str(exc))
        _print_eigen(args, report, out, _eigen_rows(est, exc.partial))
        sys.stderr.write(f"hillspps: {exc}\n")
        return EXIT_NUMERIC
    report.stage("roots", time.perf_counter() - t)
    _print_eigen(args, report, out, _eigen_rows(est, eigs))
    return EXIT_OK


def cmd_bands(args, report, out):
    est = _fit(args, report)
    bands = est.band_structure(*args.range)
    rows = sorted([("stable", a, b) for a, b in bands.stable_intervals]
                  + [("unstable", a, b) for a, b in bands.unstable_intervals], key=lambda r: r[1])
    report.meta["band_edges"] = len(bands.edges)
    if args.json:
        _emit_json(out, {"problem": report.problem, "params": report.params,
                         "intervals": [{"kind": k, "lo": a, "hi": b} for k, a, b in rows],
                         "edges": [{"n": e.index, "lambda": e.value, "boundary": e.boundary}
                                   for e in bands.edges]})
    else:
        _emit_csv(out, report, ["kind", "lambda_lo", "lambda_hi"], rows)
    return EXIT_OK


def cmd_bloch(args, report, out):
    if not args.xmax > 0:
        raise UsageError("--xmax must be positive")
    est = _fit(args, report)
    data, pair = est.bloch(args.lam)
    x = np.linspace(0.0, args.xmax, args.samples)
    fp = spectrum.bloch_solution(data, pair, x, "+")
    fm = spectrum.bloch_solution(data, pair, x, "-")
    report.meta.update({"lambda": fmt(args.lam), "D": fmt(est.series_(args.lam)),
                        "beta_plus": f"{fmt(data.beta_plus.real)}{data.beta_plus.imag:+.15g}j",
                        "beta_minus": f"{fmt(data.beta_minus.real)}{data.beta_minus.imag:+.15g}j"})
    if args.json:
        _emit_json(out, {"problem": report.problem, "params": report.params, "lambda": args.lam,
                         "beta_plus": [data.beta_plus.real, data.beta_plus.imag],
                         "beta_minus": [data.beta_minus.real, data.beta_minus.imag],
                         "x": x.tolist(), "f_plus": [fp.real.tolist(), fp.imag.tolist()],
                         "f_minus": [fm.real.tolist(), fm.imag.tolist()]})
    else:
        _emit_csv(out, report, ["x", "re_f_plus", "im_f_plus", "re_f_minus", "im_f_minus"],
                  zip(x, fp.real, fp.imag, fm.real, fm.imag))
    return EXIT_OK


def cmd_darboux(args, report, out):
    est = _fit(args, report)
    t = time.perf_counter()
    partner = est.partner()
    lam0 = est.lambda0_
    deviation = est.invariance_deviation(np.linspace(lam0 - 1.0, lam0 + 30.0, DARBOUX_PROBES))
    q_tt = darboux.double_darboux(partner)
    involution = float(np.max(np.abs(q_tt.values - partner.problem.q_values.values)))
    report.stage("darboux", time.perf_counter() - t)
    report.meta.update({"max_abs_D_minus_D_tilde": f"{deviation:.3e}",
                        "max_abs_q_tilde_tilde_minus_q": f"{involution:.3e}"})
    status = EXIT_OK if deviation <= DARBOUX_TOL else EXIT_NUMERIC
    x = est.problem_.grid.nodes
    cols = (partner.phi.values.astype(float), partner.q_tilde.values.astype(float),
            partner.f0_tilde.values.astype(float))
    if args.json:
        _emit_json(out, {"problem": report.problem, "params": report.params, "lambda0": lam0,
                         "invariance_deviation": deviation, "involution_error": involution,
                         "x": x.tolist(), "phi": cols[0].tolist(), "q_tilde": cols[1].tolist(),
                         "f0_tilde": cols[2].tolist()})
    else:
        _emit_csv(out, report, ["x", "phi", "q_tilde", "f0_tilde"], zip(x, *cols))
    sys.stderr.write(f"max|D - D~| = {deviation:.3e} over {DARBOUX_PROBES} probes\n")
    if status != EXIT_OK:
        sys.stderr.write(f"hillspps: discriminant invariance violated (> {DARBOUX_TOL:g})\n")
    return status


COMMANDS = {"discriminant": cmd_discriminant, "eigenvalues": cmd_eigenvalues, "bands": cmd_bands,
            "bloch": cmd_bloch, "darboux": cmd_darboux}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(_join_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    report = Report(args)
    try:
        return COMMANDS[args.command](args, report, out)
    except UsageError as exc:
        sys.stderr.write(f"hillspps: error: {exc}\n")
        return EXIT_USAGE
    except SeriesBudgetError as exc:
        sys.stderr.write(f"hillspps: {exc} (failing lambda={exc.lam!r})\n")
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader went away (e.g. ``| head``); silence the interpreter's flush at exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except NUMERIC_ERRORS as exc:
        sys.stderr.write(f"hillspps: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    finally:
        report.flush_timings()


if __name__ == "__main__":
    sys.exit(main())
