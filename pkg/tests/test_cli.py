import io
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from fmdiag import example_path, parse_model, parse_test_suite
from fmdiag.bench import BenchReport
from fmdiag.cli import main

GOLDEN = Path(__file__).parent / "golden" / "survey_trace.txt"
MODEL = str(example_path("survey.fm"))
TESTS = str(example_path("survey.tc"))


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_diagnose():
    code, out = run("diagnose", "--model", MODEL, "--tests", TESTS)
    assert code == 0
    assert "delta: c1 c7 c8" in out.splitlines()


def test_diagnose_trace_matches_golden():
    code, out = run("diagnose", "--model", MODEL, "--tests", TESTS, "--trace")
    assert code == 0
    assert out == GOLDEN.read_text(encoding="utf-8")


def test_diagnose_with_consider():
    # reversed order: the search now keeps c7 and c8 and lands on the other minimal diagnosis
    code, out = run("diagnose", "--model", MODEL, "--tests", TESTS, "--consider", "c8,c7,c6,c5,c4,c3,c2,c1")
    assert code == 0
    assert out.splitlines()[2:] == ["delta: c2 c1", "nodes: 7  solver-calls: 21"]


def test_missing_flags_is_usage_error(capsys):
    assert run("diagnose")[0] == 2
    assert "usage" in capsys.readouterr().err
    assert run()[0] == 2
    assert run("frobnicate")[0] == 2


def test_domain_errors_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.fm"
    bad.write_text("feature r root\nmandatory r a\nmandatory q b\n")
    assert run("analyze", "--model", str(bad))[0] == 1
    assert "line 3" in capsys.readouterr().err
    assert run("analyze", "--model", str(tmp_path / "missing.fm"))[0] == 1
    t = tmp_path / "t.tc"
    t.write_text("positive survey=f\n")
    assert run("diagnose", "--model", MODEL, "--tests", str(t))[0] == 1
    assert "no diagnosis possible" in capsys.readouterr().err
    assert run("diagnose", "--model", MODEL, "--tests", TESTS, "--consider", "c0,c1")[0] == 1


def test_check():
    code, out = run("check", "--model", MODEL, "--tests", TESTS)
    assert code == 0
    statuses = [line.split()[2] for line in out.splitlines()]
    assert statuses == ["UNSAT", "UNSAT", "UNSAT", "SAT"]


def test_encode(tmp_path):
    code, out = run("encode", "--model", MODEL)
    assert code == 0 and out.startswith("p cnf 9 17\n")
    dest = tmp_path / "m.cnf"
    assert run("encode", "--model", MODEL, "--out", str(dest)) == (0, "")
    assert dest.read_text() == out


def test_analyze():
    code, out = run("analyze", "--model", MODEL)
    assert code == 0
    assert out == "void: no\ndead: nolicense\nfalse-optional: license statistics\n"


def test_gen_tests(tmp_path):
    dest = tmp_path / "g.tc"
    assert run("gen-tests", "--model", MODEL, "--kind", "dead", "--out", str(dest))[0] == 0
    pos, neg = parse_test_suite(dest.read_text())
    assert len(pos) == 8 and neg == []
    code, out = run("diagnose", "--model", MODEL, "--tests", str(dest))
    assert code == 0 and "delta: " in out


def test_synth(tmp_path, monkeypatch):
    m, t = tmp_path / "m.fm", tmp_path / "t.tc"
    args = ["synth", "--constraints", "20", "--tests", "10", "--seed", "3", "--out-model", str(m), "--out-tests", str(t)]
    assert run(*args)[0] == 0
    first = (m.read_text(), t.read_text())
    assert len(parse_model(first[0]).features) == 10
    assert len(parse_test_suite(first[1])[0]) == 10
    assert run(*args)[0] == 0
    assert (m.read_text(), t.read_text()) == first
    # the environment seed is used when --seed is absent
    monkeypatch.setenv("FMDIAG_SEED", "3")
    code, out = run("synth", "--constraints", "20")
    assert code == 0 and out == first[0]
    monkeypatch.setenv("FMDIAG_SEED", "abc")
    assert run("synth", "--constraints", "20")[0] == 1


def test_synth_bad_params():
    assert run("synth", "--constraints", "1")[0] == 1
    assert run("synth", "--constraints", "10", "--kind-weights", "x")[0] == 2


def test_bench_small(tmp_path):
    dest = tmp_path / "b.csv"
    code, out = run("bench", "--rows", "5", "--cols", "10,20", "--reps", "2", "--seed", "42", "--out", str(dest))
    assert code == 0
    report = BenchReport.from_csv(dest.read_text())
    assert len(report.samples) == 4
    assert out.splitlines()[0].split()[-2:] == ["10", "20"]
    assert run("bench", "--rows", "x")[0] == 2


def test_version(capsys):
    assert run("--version")[0] == 0
    assert "fmdiag" in capsys.readouterr().out


@pytest.mark.parametrize("cmd", ["check", "encode", "diagnose", "analyze", "gen-tests", "synth", "bench"])
def test_help_for_every_subcommand(cmd, capsys):
    assert run(cmd, "--help")[0] == 0
    assert "usage" in capsys.readouterr().out


def test_installed_entry_point():
    exe = shutil.which("fmdiag")
    cmd = [exe] if exe else [sys.executable, "-m", "fmdiag.cli"]
    proc = subprocess.run(cmd + ["diagnose", "--model", MODEL, "--tests", TESTS],
                          capture_output=True, text=True, timeout=60)
    assert proc.returncode == 0
    assert "delta: c1 c7 c8" in proc.stdout.splitlines()
    assert subprocess.run(cmd + ["diagnose"], capture_output=True, timeout=60).returncode == 2
