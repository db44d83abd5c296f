"""``fmdiag`` command line.

Exit codes: 0 success, 1 domain error (bad model, impossible diagnosis,
unreadable file), 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import analyze, generate_tests
from .bench import DEFAULT_COLS, DEFAULT_ROWS, DEFAULT_SEED, run_bench
from .debug import diagnose, preprocess
from .encode import dump_dimacs, encode, encode_formula
from .errors import FMDiagError
from .model import parse_model, parse_test_suite, serialize_model, serialize_test_suite
from .sat import ClauseDB, SatSolver
from .synth import DEFAULT_KIND_WEIGHTS, SynthParams, synth_model, synth_tests


def _int_list(text):
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _default_seed():
    value = os.environ.get("FMDIAG_SEED")
    if value is None:
        return DEFAULT_SEED
    try:
        return int(value)
    except ValueError:
        raise FMDiagError(f"FMDIAG_SEED must be an integer, got {value!r}")


def _read(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FMDiagError(f"cannot read {path}: {exc}")


def _emit(text, out, stdout):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def _load(args):
    model = parse_model(_read(args.model))
    positives, negatives = ([], [])
    if getattr(args, "tests", None):
        positives, negatives = parse_test_suite(_read(args.tests), model)
    return model, positives, negatives


def cmd_check(args, out):
    model, positives, negatives = _load(args)
    cs = encode(model)
    db = ClauseDB(cs.num_vars, cs.all_clauses())
    solver = SatSolver()
    for t in (*positives, *negatives):
        status = solver.solve(db, encode_formula(t.formula, cs)).status
        out.write(f"{t.label} {t.polarity.value} {status}  {t.formula}\n")


def cmd_encode(args, out):
    model = parse_model(_read(args.model))
    _emit(dump_dimacs(encode(model)), args.out, out)


def cmd_diagnose(args, out):
    model, positives, negatives = _load(args)
    cs = encode(model)
    consider = None
    if args.consider:
        consider = [c.strip() for c in args.consider.split(",") if c.strip()]
    result = diagnose(preprocess(cs, consider, positives, negatives))
    out.write(result.report(trace=args.trace))


def cmd_analyze(args, out):
    model = parse_model(_read(args.model))
    out.write(analyze(encode(model), model).format())


def cmd_gen_tests(args, out):
    model = parse_model(_read(args.model))
    _emit(serialize_test_suite(generate_tests(model, {args.kind})), args.out, out)


def cmd_synth(args, out):
    seed = args.seed if args.seed is not None else _default_seed()
    try:
        params = SynthParams(
            args.constraints,
            seed=seed,
            num_tests=args.tests,
            inconsistency_share=args.share,
            ctc_ratio=args.ctc_ratio,
            kind_weights=args.kind_weights,
            max_group=args.max_group,
        )
    except ValueError as exc:
        raise FMDiagError(str(exc))
    model = synth_model(params)
    tests = synth_tests(model, params)
    _emit(serialize_model(model), args.out_model, out)
    if args.out_tests or tests:
        _emit(serialize_test_suite(tests), args.out_tests, out)


def cmd_bench(args, out):
    seed = args.seed if args.seed is not None else _default_seed()

    def progress(s):
        state = "failed: " + s.error if s.failed else f"{s.diagnosis_ms:.1f} ms"
        print(f"  |T_pi|={s.t_pi} |CF|={s.cf} rep={s.rep}: {state}", file=sys.stderr)

    try:
        report = run_bench(args.rows, args.cols, args.reps, seed, args.jobs, progress if args.verbose else None)
    except ValueError as exc:
        raise FMDiagError(str(exc))
    if args.out:
        Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    out.write(report.format_table())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fmdiag", description="Test and debug feature models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("check", help="report SAT/UNSAT of every test against the model")
    p.add_argument("--model", required=True)
    p.add_argument("--tests", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("encode", help="dump the labeled CNF encoding")
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("diagnose", help="compute a minimal diagnosis with DirectDebug")
    p.add_argument("--model", required=True)
    p.add_argument("--tests", required=True)
    p.add_argument("--consider", help="comma-separated constraint labels (default: all but c0)")
    p.add_argument("--trace", action="store_true", help="print one line per recursion node")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("analyze", help="void model, dead features, false optionals")
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("gen-tests", help="generate positive tests from analysis operations")
    p.add_argument("--model", required=True)
    p.add_argument("--kind", choices=["dead"], default="dead")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_tests)

    p = sub.add_parser("synth", help="generate a random model and test suite")
    p.add_argument("--constraints", type=int, required=True)
    p.add_argument("--tests", type=int, default=0)
    p.add_argument("--share", type=float, default=0.30)
    p.add_argument("--seed", type=int)
    p.add_argument("--ctc-ratio", type=float, default=0.2)
    p.add_argument("--kind-weights", type=_float_list, default=DEFAULT_KIND_WEIGHTS,
                   help="mandatory,optional,alternative,or weights")
    p.add_argument("--max-group", type=int, default=4)
    p.add_argument("--out-model")
    p.add_argument("--out-tests")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="runtime grid over |T_pi| x |CF|")
    p.add_argument("--rows", type=_int_list, default=list(DEFAULT_ROWS), help="|T_pi| values")
    p.add_argument("--cols", type=_int_list, default=list(DEFAULT_COLS), help="|CF| values")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args, stdout)
    except (FMDiagError, OSError) as exc:
        print(f"fmdiag: error: {exc}", file=sys.stderr)
        return 1
    return 0


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
