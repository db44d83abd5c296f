"""Acceptance criteria, one test each.

Every test records a ``criterion N [PASS|FAIL] ...`` line; the lines are
printed in the pytest terminal summary and when this file is run directly.
Tolerances are fixed here and nowhere else.
"""

import io
import itertools
import math
import random
import time
from pathlib import Path

import pytest

from fmdiag import (
    NoDiagnosisPossible,
    SynthParams,
    analyze,
    diagnose,
    encode,
    example_path,
    oracle_all_minimal_diagnoses,
    parse_model,
    parse_test_suite,
    preprocess,
    synth_model,
    synth_tests,
    verify_minimal,
)
from fmdiag.bench import DEFAULT_COLS, DEFAULT_ROWS, run_bench
from fmdiag.cli import main
from fmdiag.debug import is_diagnosis
from fmdiag.encode import constraint_formula
from fmdiag.model import CrossTreeConstraint, FeatureModel, Relationship
from fmdiag.sat import satisfies

EXAMPLE_RUNTIME_S = 1.0        # criterion 1
PROPERTY_INSTANCES = 500       # criterion 6
PROPERTY_BUDGET_S = 300.0      # criterion 6
BIG_CELL = (100, 1000)         # criterion 7
BIG_CELL_LIMIT_S = 60.0        # criterion 7
NOISE_FACTOR = 2.0             # criterion 7
BENCH_REPS, BENCH_SEED = 3, 42

GOLDEN = Path(__file__).parent / "golden" / "survey_trace.txt"
MODEL_PATH = example_path("survey.fm")
TESTS_PATH = example_path("survey.tc")

RESULTS: list[str] = []


def record(n, title, ok, detail=""):
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    RESULTS.append(line)
    print(line)
    return ok


def survey_session():
    model = parse_model(MODEL_PATH.read_text(encoding="utf-8"))
    pos, neg = parse_test_suite(TESTS_PATH.read_text(encoding="utf-8"), model)
    cs = encode(model)
    return model, cs, preprocess(cs, None, pos, neg)


def cli(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_criterion_1_survey_example_end_to_end():
    start = time.perf_counter()
    code, out = cli("diagnose", "--model", str(MODEL_PATH), "--tests", str(TESTS_PATH))
    elapsed = time.perf_counter() - start
    expected = ["filtered: t4", "gamma: c2 c3 c4 c5 c6", "delta: c1 c7 c8"]
    lines = out.splitlines()
    nodes = int(lines[3].split()[1]) if len(lines) > 3 else None
    ok = code == 0 and lines[:3] == expected and nodes == 11 and elapsed < EXAMPLE_RUNTIME_S
    assert record(1, "survey example end-to-end", ok,
                  f"{' | '.join(lines)} ({elapsed * 1000:.0f} ms, limit {EXAMPLE_RUNTIME_S:.0f} s)")


def test_criterion_2_trace_fidelity():
    code, out = cli("diagnose", "--model", str(MODEL_PATH), "--tests", str(TESTS_PATH), "--trace")
    golden = GOLDEN.read_text(encoding="utf-8")
    diff = [(a, b) for a, b in itertools.zip_longest(out.splitlines(), golden.splitlines()) if a != b]
    ok = code == 0 and not diff
    assert record(2, "trace matches the golden 11-node tree", ok,
                  "exact textual match" if ok else f"first difference: {diff[0]}")


def test_criterion_3_ground_truth_diagnoses():
    _, _, session = survey_session()
    got = oracle_all_minimal_diagnoses(session)
    expected = {frozenset({"c1", "c2"}), frozenset({"c1", "c7", "c8"})}
    shown = sorted(sorted(d, key=lambda c: int(c[1:])) for d in got)
    assert record(3, "all minimal diagnoses", got == expected, f"{shown}")


def test_criterion_4_analysis_claims():
    model, cs, _ = survey_session()
    before = analyze(cs, model)
    after = analyze(cs.without(["c1", "c7", "c8"]), model)
    ok = (
        "nolicense" in before.dead_features
        and "statistics" in before.false_optionals
        and "nolicense" not in after.dead_features
        and "statistics" not in after.false_optionals
    )
    assert record(4, "analysis before/after deleting {c1,c7,c8}", ok,
                  f"before dead={list(before.dead_features)} false-optional={list(before.false_optionals)}; "
                  f"after dead={list(after.dead_features)} false-optional={list(after.false_optionals)}")


def _semantics(kind, a, xs):
    # written from the relationship definitions, independent of the encoder
    if kind == "mandatory":
        return a == xs[0]
    if kind == "optional":
        return a or not xs[0]
    if kind == "or":
        return a == any(xs)
    if kind == "alternative":
        return all(x == (a and not any(xs[:i] + xs[i + 1:])) for i, x in enumerate(xs))
    if kind == "requires":
        return (not a) or xs[0]
    return not (a and xs[0])  # excludes


def test_criterion_5_encoding_fidelity():
    cases = [("mandatory", 1), ("optional", 1), ("requires", 1), ("excludes", 1)]
    cases += [(k, n) for k in ("alternative", "or") for n in (2, 3, 4)]
    rows = mismatches = 0
    for kind, k in cases:
        kids = tuple(f"x{i}" for i in range(k))
        if kind in ("requires", "excludes"):
            model = FeatureModel(("r", "a", "x0"), "r",
                                 (Relationship("optional", "r", ("a",)), Relationship("optional", "r", ("x0",))),
                                 (CrossTreeConstraint(kind, "a", "x0"),))
        else:
            model = FeatureModel(("a", *kids), "a", (Relationship(kind, "a", kids),))
        cs = encode(model)
        target = cs.constraints[-1]
        formula = constraint_formula(target)
        for bits in itertools.product((False, True), repeat=k + 1):
            values = dict(zip(("a", *kids), bits))
            full = {f: values.get(f, False) for f in cs.variables}
            witness = [full[f] for f in cs.variables]
            want = _semantics(kind, bits[0], list(bits[1:]))
            rows += 1
            if satisfies(witness, target.clauses) != want or formula.evaluate(full) != want:
                mismatches += 1
    _, cs, _ = survey_session()
    config = {"survey": True, "payment": True, "license": True, "nolicense": False, "ABtesting": True,
              "statistics": True, "Q&A": True, "multiplechoice": True, "singlechoice": True}
    example_ok = satisfies([config[f] for f in cs.variables], cs.all_clauses())
    ok = mismatches == 0 and example_ok
    assert record(5, "CNF equals the logic formulas on every assignment", ok,
                  f"{len(cases)} kind/size cases, {rows} rows, {mismatches} mismatches; "
                  f"example configuration {'satisfies' if example_ok else 'VIOLATES'} the encoding")


def test_criterion_6_property_suite():
    start = time.perf_counter()
    failures, oracle_checks = [], 0
    for seed in range(PROPERTY_INSTANCES):
        rng = random.Random(seed)
        cf, n_tests = rng.randint(8, 40), rng.randint(2, 20)
        try:
            p = SynthParams(cf, seed=seed, num_tests=n_tests, inconsistency_share=0.3)
            model = synth_model(p)
            tests = synth_tests(model, p)
            cs = encode(model)
            s = preprocess(cs, None, tests)
            r = diagnose(s)
            problems = []
            if not verify_minimal(r.delta, s):
                problems.append("not minimal")
            if r.solver_calls != sum(len(n.T) for n in r.trace):
                problems.append("solver-call counter differs from sum of |T|")
            if len(s.C) <= 20:
                oracle_checks += 1
                if frozenset(r.delta) not in oracle_all_minimal_diagnoses(s):
                    problems.append("not in oracle set")
            order = [c.label for c in s.C]
            rng.shuffle(order)
            s2 = preprocess(cs, order, tests)
            r2 = diagnose(s2)
            if not (verify_minimal(r2.delta, s2) and is_diagnosis(r2.delta, s2, s2.positives)):
                problems.append("permuted C lost validity or minimality")
        except Exception as exc:  # any crash is a failure of the criterion, not of the harness
            problems = [f"{type(exc).__name__}: {exc}"]
        if problems:
            failures.append((seed, cf, n_tests, problems))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < PROPERTY_BUDGET_S
    assert record(6, "property suite", ok,
                  f"{PROPERTY_INSTANCES} instances, {oracle_checks} oracle comparisons, {len(failures)} failures, "
                  f"{elapsed:.1f} s (limit {PROPERTY_BUDGET_S:.0f} s)" + (f"; first: {failures[0]}" if failures else ""))


@pytest.mark.slow
def test_criterion_7_desk_scale_performance():
    report = run_bench(DEFAULT_ROWS, DEFAULT_COLS, reps=BENCH_REPS, seed=BENCH_SEED)
    failed = [(s.t_pi, s.cf, s.rep) for s in report.samples if s.failed]
    big = report.cell(*BIG_CELL)
    big_max_s = max((s.diagnosis_ms for s in big if not s.failed), default=math.inf) / 1000
    violations = []
    for c in DEFAULT_COLS:
        lo, hi = report.mean_ms(DEFAULT_ROWS[0], c), report.mean_ms(DEFAULT_ROWS[-1], c)
        if not hi * NOISE_FACTOR >= lo:
            violations.append(f"column {c}: {hi:.1f} ms vs {lo:.1f} ms")
    for r in DEFAULT_ROWS:
        lo, hi = report.mean_ms(r, DEFAULT_COLS[0]), report.mean_ms(r, DEFAULT_COLS[-1])
        if not hi * NOISE_FACTOR >= lo:
            violations.append(f"row {r}: {hi:.1f} ms vs {lo:.1f} ms")
    print(report.format_table())
    ok = not failed and big_max_s < BIG_CELL_LIMIT_S and not violations
    assert record(7, "desk-scale performance", ok,
                  f"cell {BIG_CELL} slowest repetition {big_max_s:.2f} s (limit {BIG_CELL_LIMIT_S:.0f} s), "
                  f"mean {report.mean_ms(*BIG_CELL):.0f} ms; monotone growth within {NOISE_FACTOR:g}x: "
                  f"{'holds' if not violations else violations}; failed samples: {len(failed)}")


def test_criterion_8_preprocessing_contract():
    model, cs, _ = survey_session()
    pos, _ = parse_test_suite("positive payment\npositive survey=f\n", model)
    try:
        preprocess(cs, None, pos)
        raised = None
    except NoDiagnosisPossible as exc:
        raised = exc
    first_ok = raised is not None and raised.test.label == "t2" and "t2" in str(raised)

    consistent, _ = parse_test_suite("positive singlechoice=f\npositive license & statistics\n", model)
    r = diagnose(preprocess(cs, None, consistent))
    second_ok = r.delta == () and r.nodes == 0 and r.solver_calls == 0
    assert record(8, "preprocessing contract", first_ok and second_ok,
                  f"contradicting test -> {type(raised).__name__ if raised else 'no error'} naming "
                  f"{raised.test.label if raised else '-'}; consistent suite -> delta={list(r.delta)}, "
                  f"DirectDebug invocations={r.nodes}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
