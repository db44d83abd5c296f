"""Test-driven diagnosis of feature-model constraint sets.

The flow is ``preprocess`` (fold negative tests into the background, keep
only the positive tests that actually fail) followed by ``diagnose``, which
runs the DirectDebug divide and conquer search for a maximal satisfiable
subset of the consideration set and reports its complement as the
diagnosis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .encode import (
    ConstraintSet,
    LabeledConstraint,
    NegatedTest,
    constraint_formula,
    encode_formula,
    max_var,
)
from .errors import FMDiagError
from .model import And, Formula, Iff, Implies, Lit, Not, Or, TestCase
from .sat import ClauseDB, SatSolver

log = logging.getLogger(__name__)

ROOT_LABEL = "c0"
ORACLE_LIMIT = 20


class NoDiagnosisPossible(FMDiagError):
    """A positive test contradicts the background knowledge on its own."""

    def __init__(self, test: TestCase):
        self.test = test
        super().__init__(
            f"no diagnosis possible: positive test {test.label} ({test.formula}) "
            "is inconsistent with the background knowledge alone"
        )


class InvalidConsiderationSet(FMDiagError):
    pass


class TooLarge(FMDiagError):
    pass


@dataclass
class TraceNode:
    id: int
    depth: int
    C: list[str]
    B: list[str]
    T: list[str]
    T_prime: list[str] = field(default_factory=list)
    result: list[str] = field(default_factory=list)

    def format(self) -> str:
        def fmt(labels):
            return "{" + ",".join(labels) + "}"

        return (
            f"{'  ' * self.depth}[{self.id}] C={fmt(self.C)} B={fmt(self.B)} "
            f"T={fmt(self.T)} T'={fmt(self.T_prime)} return={fmt(self.result)}"
        )


class DebugSession:
    """State of one diagnosis run: consideration set, background, active tests.

    Created by :func:`preprocess`.  Holds its own solver, so sessions are
    independent of each other but not shareable across threads.
    """

    def __init__(self, cs, C, B, positives, active, filtered, notices, num_vars, test_clauses, solver):
        self.cs: ConstraintSet = cs
        self.C: list[LabeledConstraint] = C
        self.B: list[LabeledConstraint] = B
        self.positives: list[TestCase] = positives
        self.active: list[TestCase] = active
        self.filtered: list[str] = filtered
        self.notices: list[str] = notices
        self.num_vars = num_vars
        self.test_clauses = test_clauses
        self.solver: SatSolver = solver
        self.preprocess_calls = solver.calls
        self.nodes = 0
        self.trace: list[TraceNode] = []
        solver.reset()

    def _db(self, constraints: Iterable[LabeledConstraint]) -> ClauseDB:
        return ClauseDB.concat(self.num_vars, [c.clauses for c in constraints])

    def is_consistent(
        self, C: Sequence[LabeledConstraint], B: Sequence[LabeledConstraint], T: Sequence[TestCase]
    ) -> tuple[bool, list[TestCase]]:
        """Check every test against C ∪ B; return (all passed, the failing tests)."""
        db = self._db([*B, *C])
        failing = [t for t in T if not self.solver.solve(db, self.test_clauses[t])]
        return not failing, failing

    def direct_debug(
        self,
        C: Sequence[LabeledConstraint],
        B: Sequence[LabeledConstraint],
        T: Sequence[TestCase],
        _depth: int = 0,
    ) -> list[LabeledConstraint]:
        """Maximal subset Γ of C such that Γ ∪ B is consistent with each test in T."""
        self.nodes += 1
        node = TraceNode(
            len(self.trace) + 1, _depth, [c.label for c in C], [b.label for b in B], [t.label for t in T]
        )
        self.trace.append(node)

        ok, T_prime = self.is_consistent(C, B, T)
        node.T_prime = [t.label for t in T_prime]
        if ok:
            result = list(C)
        elif len(C) == 1:
            result = []
        else:
            k = len(C) // 2
            C1, C2 = C[:k], C[k:]
            # both halves see this node's failing tests; Γ2 joins the background of the second call
            gamma2 = self.direct_debug(C1, B, T_prime, _depth + 1)
            gamma1 = self.direct_debug(C2, [*B, *gamma2], T_prime, _depth + 1)
            result = gamma2 + gamma1
        node.result = [c.label for c in result]
        return result


@dataclass(frozen=True)
class DiagnosisResult:
    gamma: tuple[str, ...]
    delta: tuple[str, ...]
    filtered_tests: tuple[str, ...]
    active_tests: tuple[str, ...]
    nodes: int
    solver_calls: int
    preprocess_calls: int
    notices: tuple[str, ...] = ()
    trace: tuple[TraceNode, ...] = ()

    def report(self, trace: bool = False) -> str:
        lines = [n.format() for n in self.trace] if trace else []
        lines += [f"notice: {n}" for n in self.notices]
        lines += [
            "filtered:" + "".join(" " + t for t in self.filtered_tests),
            "gamma:" + "".join(" " + c for c in self.gamma),
            "delta:" + "".join(" " + c for c in self.delta),
            f"nodes: {self.nodes}  solver-calls: {self.solver_calls}",
        ]
        return "\n".join(lines) + "\n"


def _consideration(cs: ConstraintSet, C_labels) -> list[str]:
    if C_labels is None:
        return [label for label in cs.labels if label != ROOT_LABEL]
    C_labels = list(C_labels)
    if ROOT_LABEL in C_labels:
        raise InvalidConsiderationSet("the root constraint c0 cannot be diagnosed")
    unknown = [label for label in C_labels if label not in cs]
    if unknown:
        raise InvalidConsiderationSet(f"unknown constraint label(s): {', '.join(unknown)}")
    if len(set(C_labels)) != len(C_labels):
        raise InvalidConsiderationSet("repeated constraint label in consideration set")
    return C_labels


def preprocess(
    cs: ConstraintSet,
    C_labels: Sequence[str] | None = None,
    positives: Sequence[TestCase] = (),
    negatives: Sequence[TestCase] = (),
    solver: SatSolver | None = None,
) -> DebugSession:
    """Build the background and filter the positive tests.

    ``C_labels`` defaults to every constraint except c0.  Negative tests that
    the knowledge base admits are added to the background in negated form;
    positive tests already consistent with C ∪ B are filtered out.
    """
    solver = solver or SatSolver()
    C_labels = _consideration(cs, C_labels)
    in_C = set(C_labels)
    C = cs.select(C_labels)
    B = [cs[ROOT_LABEL]] + [c for c in cs if c.label != ROOT_LABEL and c.label not in in_C]

    notices = []
    num_vars = cs.num_vars
    base = ClauseDB.concat(cs.num_vars, [c.clauses for c in (*B, *C)])
    folded = []
    for t in negatives:
        if solver.solve(base, encode_formula(t.formula, cs, cs.num_vars + 1)):
            clauses = encode_formula(Not(t.formula), cs, num_vars + 1)
            num_vars = max(num_vars, max_var(clauses))
            folded.append(LabeledConstraint(f"!{t.label}", tuple(clauses), NegatedTest(t), f"¬({t.formula})"))
        else:
            notices.append(f"negative test {t.label} already inconsistent with C ∪ B; not folded")
            log.info(notices[-1])
    B += folded

    test_clauses = {t: encode_formula(t.formula, cs, num_vars + 1) for t in positives}
    num_vars_all = max([num_vars] + [max_var(cl) for cl in test_clauses.values()])
    full = ClauseDB.concat(num_vars_all, [c.clauses for c in (*B, *C)])
    background = ClauseDB.concat(num_vars_all, [c.clauses for c in B])
    active, filtered = [], []
    for t in positives:
        if solver.solve(full, test_clauses[t]):
            filtered.append(t.label)
        elif not solver.solve(background, test_clauses[t]):
            raise NoDiagnosisPossible(t)
        else:
            active.append(t)
    return DebugSession(cs, C, B, list(positives), active, filtered, notices, num_vars_all, test_clauses, solver)


def diagnose(session: DebugSession) -> DiagnosisResult:
    """Run DirectDebug on the session and return Γ, its complement Δ and counters."""
    session.solver.reset()
    session.nodes = 0
    session.trace = []
    if session.active:
        gamma = session.direct_debug(session.C, session.B, session.active)
    else:
        gamma = list(session.C)
    kept = {c.label for c in gamma}
    delta = [c.label for c in session.C if c.label not in kept]
    if not is_diagnosis(delta, session, session.positives):
        raise AssertionError(f"internal error: {delta} does not restore consistency")
    return DiagnosisResult(
        gamma=tuple(c.label for c in session.C if c.label in kept),
        delta=tuple(delta),
        filtered_tests=tuple(session.filtered),
        active_tests=tuple(t.label for t in session.active),
        nodes=session.nodes,
        solver_calls=session.solver.calls,
        preprocess_calls=session.preprocess_calls,
        notices=tuple(session.notices),
        trace=tuple(session.trace),
    )


def debug(
    cs: ConstraintSet,
    positives: Sequence[TestCase],
    negatives: Sequence[TestCase] = (),
    consider: Sequence[str] | None = None,
) -> DiagnosisResult:
    return diagnose(preprocess(cs, consider, positives, negatives))


# -- checking ---------------------------------------------------------------


def _passes(session: DebugSession, removed: set[str], tests: Sequence[TestCase], solver: SatSolver) -> list[bool]:
    db = session._db([*session.B, *(c for c in session.C if c.label not in removed)])
    out = []
    for t in tests:
        clauses = session.test_clauses.get(t)
        if clauses is None:
            clauses = encode_formula(t.formula, session.cs, session.num_vars + 1)
        out.append(solver.solve(db, clauses).sat)
    return out


def is_diagnosis(delta: Iterable[str], session: DebugSession, tests: Sequence[TestCase] | None = None) -> bool:
    """True when removing ``delta`` from C makes every test consistent with the rest."""
    tests = session.active if tests is None else tests
    return all(_passes(session, set(delta), tests, SatSolver()))


def verify_minimal(delta: Iterable[str], session: DebugSession) -> bool:
    """Validity plus single-element minimality of ``delta`` w.r.t. the active tests."""
    delta = list(delta)
    C_labels = {c.label for c in session.C}
    if not set(delta) <= C_labels:
        raise InvalidConsiderationSet("diagnosis mentions constraints outside C")
    solver = SatSolver()
    removed = set(delta)
    if not all(_passes(session, removed, session.active, solver)):
        return False
    for c in delta:
        if all(_passes(session, removed - {c}, session.active, solver)):
            return False
    return True


# -- brute-force oracle -----------------------------------------------------


def _eval_columns(f: Formula, cols: dict[str, np.ndarray]) -> np.ndarray:
    if isinstance(f, Lit):
        return cols[f.name] if f.value else ~cols[f.name]
    if isinstance(f, Not):
        return ~_eval_columns(f.arg, cols)
    if isinstance(f, And):
        return np.logical_and.reduce([_eval_columns(a, cols) for a in f.args])
    if isinstance(f, Or):
        return np.logical_or.reduce([_eval_columns(a, cols) for a in f.args])
    if isinstance(f, Implies):
        return ~_eval_columns(f.lhs, cols) | _eval_columns(f.rhs, cols)
    if isinstance(f, Iff):
        return _eval_columns(f.lhs, cols) == _eval_columns(f.rhs, cols)
    raise TypeError(f"not a formula: {f!r}")


def _minimal(masks: Iterable[int]) -> list[int]:
    out: list[int] = []
    for m in sorted(set(masks), key=lambda x: (bin(x).count("1"), x)):
        if not any(o & m == o for o in out):
            out.append(m)
    return out


def oracle_all_minimal_diagnoses(session: DebugSession, truth_table_limit: int = 20) -> set[frozenset[str]]:
    """Every ⊆-minimal diagnosis of the session, by exhaustive enumeration.

    Subsets of C are visited by increasing size (lexicographic within a size)
    and kept when they repair all active tests and contain no smaller hit.
    For models with at most ``truth_table_limit`` features the repair check
    is evaluated from a truth table of the constraints' logic formulas,
    without the SAT engine or the clause encoding; larger models fall back
    to solver calls.
    """
    C = session.C
    if len(C) > ORACLE_LIMIT:
        raise TooLarge(f"oracle enumerates at most {ORACLE_LIMIT} constraints, got {len(C)}")
    if not session.active:
        return {frozenset()}
    labels = [c.label for c in C]
    features = session.cs.variables

    if len(features) <= truth_table_limit:
        n = len(features)
        rows = np.arange(1 << n, dtype=np.int64)
        cols = {f: ((rows >> i) & 1).astype(bool) for i, f in enumerate(features)}
        b_ok = np.ones(1 << n, dtype=bool)
        for b in session.B:
            b_ok &= _eval_columns(constraint_formula(b), cols)
        viol = np.zeros(1 << n, dtype=np.int64)
        for i, c in enumerate(C):
            viol |= (~_eval_columns(constraint_formula(c), cols)).astype(np.int64) << i
        per_test = []
        for t in session.active:
            holds = b_ok & _eval_columns(t.formula, cols)
            per_test.append(_minimal(int(m) for m in np.unique(viol[holds])))
        if any(not ms for ms in per_test):
            return set()

        def repairs(mask: int) -> bool:
            return all(any(m & ~mask == 0 for m in ms) for ms in per_test)

        union = 0
        for ms in per_test:
            for m in ms:
                union |= m
        # constraints outside every minimal violation set never occur in a minimal diagnosis
        candidates = [i for i in range(len(C)) if union >> i & 1]
    else:
        solver = SatSolver()

        def repairs(mask: int) -> bool:
            removed = {labels[i] for i in range(len(C)) if mask >> i & 1}
            return all(_passes(session, removed, session.active, solver))

        candidates = list(range(len(C)))

    found: list[int] = []
    for size in range(len(candidates) + 1):
        open_subsets = False
        for combo in combinations(candidates, size):
            mask = 0
            for i in combo:
                mask |= 1 << i
            if any(f & mask == f for f in found):
                continue
            open_subsets = True
            if repairs(mask):
                found.append(mask)
        if not open_subsets:
            # every subset of this size already contains a diagnosis, so every larger one does too
            break
    return {frozenset(labels[i] for i in range(len(C)) if m >> i & 1) for m in found}

