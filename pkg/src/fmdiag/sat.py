"""DPLL satisfiability checking with unit propagation.

Binary clauses propagate through static implication lists, longer ones
through two watched literals; backtracking is chronological and there is
no clause learning.  Branching is fixed (lowest unassigned variable, true
first) so witnesses are reproducible, unless a random generator is passed
to sample varied witnesses.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

Clause = Sequence[int]


class ClauseDB:
    """A clause list over variables 1..num_vars.

    An empty clause is not stored; it only marks the database as trivially
    unsatisfiable.  The first solve compiles the clauses (binary clauses into
    implication lists) and later solves on the same database reuse that.
    """

    __slots__ = ("num_vars", "clauses", "trivially_unsat", "_compiled")

    def __init__(self, num_vars: int, clauses: Iterable[Clause] = ()):
        kept = []
        empty = False
        top = 0
        for c in clauses:
            if not c:
                empty = True
                continue
            kept.append(c)
            for lit in c:
                if lit == 0:
                    raise ValueError("literal 0 is not a variable")
                a = lit if lit > 0 else -lit
                if a > top:
                    top = a
        self.num_vars = max(num_vars, top)
        self.clauses = kept
        self.trivially_unsat = empty
        self._compiled = None

    @classmethod
    def concat(cls, num_vars: int, parts: Iterable[Iterable[Clause]]) -> "ClauseDB":
        """Join pre-validated clause groups without re-scanning literals."""
        db = cls.__new__(cls)
        db.num_vars = num_vars
        db.clauses = [c for part in parts for c in part]
        db.trivially_unsat = False
        db._compiled = None
        return db

    def __len__(self):
        return len(self.clauses)

    def compiled(self):
        if self._compiled is None:
            self._compiled = _compile(self.num_vars, self.clauses)
        return self._compiled


def _code(lit: int) -> int:
    # literal code: 2v for +v, 2v+1 for -v; negation is code ^ 1
    return 2 * lit if lit > 0 else 1 - 2 * lit


@functools.lru_cache(maxsize=1 << 16)
def _unique_codes(c: tuple[int, ...]) -> tuple[int, ...] | None:
    """Codes of the distinct literals of ``c``; None for a tautology."""
    out: list[int] = []
    for lit in c:
        x = _code(lit)
        if x in out:
            continue
        if x ^ 1 in out:
            return None
        out.append(x)
    return tuple(out)


def _compile(n: int, clauses: Iterable[Clause]):
    units: list[int] = []
    implied: list[list[int]] = [[] for _ in range(2 * n + 2)]
    longs: list[list[int]] = []
    for c in clauses:
        codes = _unique_codes(c if type(c) is tuple else tuple(c))
        if codes is None:
            continue
        if len(codes) == 1:
            units.append(codes[0])
        elif len(codes) == 2:
            a, b = codes
            implied[a ^ 1].append(b)
            implied[b ^ 1].append(a)
        else:
            longs.append(codes)
    return units, implied, longs


@dataclass(frozen=True)
class SatResult:
    sat: bool
    witness: tuple[bool, ...] | None = None  # witness[i] is the value of variable i + 1

    @property
    def status(self) -> str:
        return "SAT" if self.sat else "UNSAT"

    def __bool__(self):
        return self.sat


def satisfies(witness: Sequence[bool], clauses: Iterable[Clause]) -> bool:
    for c in clauses:
        for lit in c:
            if witness[lit - 1] if lit > 0 else not witness[-lit - 1]:
                break
        else:
            return False
    return True


def _search(n: int, compiled, assumptions: Sequence[Clause], order: Sequence[int], phase) -> list[int] | None:
    units, implied, longs = compiled
    if len(implied) < 2 * n + 2:
        implied = implied + [()] * (2 * n + 2 - len(implied))
    # val[code]: 1 true, -1 false, 0 unassigned
    val = [0] * (2 * n + 2)
    watches: dict[int, list] = {}
    trail: list[int] = []

    def assign(x):
        val[x] = 1
        val[x ^ 1] = -1
        trail.append(x)

    extra = []
    for c in assumptions:
        codes = _unique_codes(c if type(c) is tuple else tuple(c))
        if codes is None:
            continue
        if len(codes) == 1:
            extra.append(codes[0])
        else:
            longs = [*longs, codes]
    for codes in longs:
        entry = [codes, codes[0], codes[1]]
        for x in codes[:2]:
            wl = watches.get(x)
            if wl is None:
                watches[x] = [entry]
            else:
                wl.append(entry)
    for x in (*units, *extra):
        v = val[x]
        if v == -1:
            return None
        if v == 0:
            assign(x)

    qhead = 0

    def propagate() -> bool:
        nonlocal qhead
        while qhead < len(trail):
            true_lit = trail[qhead]
            qhead += 1
            for y in implied[true_lit]:
                v = val[y]
                if v == 0:
                    assign(y)
                elif v == -1:
                    return False
            false_lit = true_lit ^ 1
            wl = watches.get(false_lit)
            if not wl:
                continue
            keep = []
            i = 0
            m = len(wl)
            while i < m:
                entry = wl[i]
                i += 1
                other = entry[2] if entry[1] == false_lit else entry[1]
                if val[other] == 1:
                    keep.append(entry)
                    continue
                for x in entry[0]:
                    if x != other and x != false_lit and val[x] != -1:
                        if entry[1] == false_lit:
                            entry[1] = x
                        else:
                            entry[2] = x
                        if x in watches:
                            watches[x].append(entry)
                        else:
                            watches[x] = [entry]
                        break
                else:
                    keep.append(entry)
                    if val[other] == -1:
                        keep.extend(wl[i:])
                        watches[false_lit] = keep
                        return False
                    assign(other)
            watches[false_lit] = keep
        return True

    if isinstance(order, range):
        position = None
    else:
        position = {v: i for i, v in enumerate(order)}
    decisions: list[tuple[int, int, bool]] = []  # (trail length, literal code, flipped)
    ptr = 0
    while True:
        if not propagate():
            while decisions and decisions[-1][2]:
                decisions.pop()
            if not decisions:
                return None
            mark, x, _ = decisions.pop()
            for undone in trail[mark:]:
                val[undone] = 0
                val[undone ^ 1] = 0
            del trail[mark:]
            qhead = mark
            decisions.append((mark, x ^ 1, True))
            assign(x ^ 1)
            v = x >> 1
            ptr = v - 1 if position is None else position[v]
            continue
        while ptr < n and val[2 * order[ptr]] != 0:
            ptr += 1
        if ptr == n:
            return val
        v = order[ptr]
        x = 2 * v if phase(v) else 2 * v + 1
        decisions.append((len(trail), x, False))
        assign(x)


class SatSolver:
    """Stateful front end that counts :meth:`solve` calls.

    One instance per diagnosis session; instances are not thread safe.
    """

    def __init__(self, check_witness: bool = __debug__):
        self.calls = 0
        self.check_witness = check_witness

    def count_calls(self) -> int:
        return self.calls

    def reset(self) -> None:
        self.calls = 0

    def solve(
        self,
        db: ClauseDB,
        assumptions: Sequence[Clause] = (),
        rng: random.Random | None = None,
    ) -> SatResult:
        """Decide ``db`` together with the assumption clauses.

        With ``rng`` the variable order and polarities are shuffled, which
        samples different witnesses; otherwise branching is deterministic.
        """
        self.calls += 1
        if db.trivially_unsat or any(len(c) == 0 for c in assumptions):
            return SatResult(False)
        n = db.num_vars
        for c in assumptions:
            for lit in c:
                if abs(lit) > n:
                    n = abs(lit)
        if rng is None:
            order = range(1, n + 1)
            phase = _always_true
        else:
            order = list(range(1, n + 1))
            rng.shuffle(order)
            signs = [rng.random() < 0.5 for _ in range(n + 1)]
            phase = signs.__getitem__
        val = _search(n, db.compiled(), assumptions, order, phase)
        if val is None:
            return SatResult(False)
        witness = tuple(val[2 * v] == 1 for v in range(1, n + 1))
        if self.check_witness:
            assert satisfies(witness, db.clauses) and satisfies(witness, assumptions), "bad witness"
        return SatResult(True, witness)


def _always_true(_v):
    return True


def solve(db: ClauseDB, assumptions: Sequence[Clause] = ()) -> SatResult:
    """One-off solve without call accounting."""
    return SatSolver().solve(db, assumptions)
