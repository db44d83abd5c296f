"""Compile feature models into labeled CNF constraint sets.

Variables are numbered 1..n in model feature order; a literal is a signed
int (``+i`` feature i true, ``-i`` false), as in DIMACS.  Auxiliary
variables introduced for general test formulas are numbered above n.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence, Union

from .errors import ModelError
from .model import (
    And,
    CrossTreeConstraint,
    CtcKind,
    FeatureModel,
    Formula,
    Iff,
    Implies,
    Lit,
    Not,
    Or,
    Relationship,
    RelKind,
    TestCase,
    literal_conjunction,
)

Clause = tuple[int, ...]


@dataclass(frozen=True)
class RootConstraint:
    feature: str


@dataclass(frozen=True)
class NegatedTest:
    """Background entry produced from a negative test that the model admits."""

    test: TestCase


Provenance = Union[RootConstraint, Relationship, CrossTreeConstraint, NegatedTest]


@dataclass(frozen=True)
class LabeledConstraint:
    label: str
    clauses: tuple[Clause, ...]
    provenance: Provenance
    display: str

    def __str__(self):
        return f"{self.label}: {self.display}"


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple[LabeledConstraint, ...]
    variables: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "_by_label", {c.label: c for c in self.constraints})
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.variables, 1)})

    @property
    def labels(self) -> list[str]:
        return [c.label for c in self.constraints]

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def var(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown feature {name!r}") from None

    def __getitem__(self, label: str) -> LabeledConstraint:
        return self._by_label[label]

    def __contains__(self, label) -> bool:
        return label in self._by_label

    def __iter__(self):
        return iter(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def select(self, labels: Iterable[str]) -> list[LabeledConstraint]:
        return [self._by_label[label] for label in labels]

    def without(self, labels: Iterable[str]) -> "ConstraintSet":
        drop = set(labels)
        return ConstraintSet(tuple(c for c in self.constraints if c.label not in drop), self.variables)

    def all_clauses(self) -> list[Clause]:
        return [cl for c in self.constraints for cl in c.clauses]

    def assignment(self, witness: Sequence[bool]) -> dict[str, bool]:
        """Map a solver witness (index 0 = variable 1) back to feature names."""
        return {name: bool(witness[i]) for i, name in enumerate(self.variables)}


# -- model encoding ---------------------------------------------------------


def _relationship_clauses(rel: Relationship, var) -> list[Clause]:
    a = var(rel.parent)
    kids = [var(c) for c in rel.children]
    if rel.kind is RelKind.MANDATORY:
        b = kids[0]
        return [(-a, b), (-b, a)]
    if rel.kind is RelKind.OPTIONAL:
        return [(-kids[0], a)]
    up = [(-k, a) for k in kids]
    if rel.kind is RelKind.ALTERNATIVE:
        up += [(-x, -y) for x, y in combinations(kids, 2)]
    return up + [(-a, *kids)]


def _relationship_display(rel: Relationship) -> str:
    p, kids = rel.parent, rel.children
    if rel.kind is RelKind.MANDATORY:
        return f"{p} ↔ {kids[0]}"
    if rel.kind is RelKind.OPTIONAL:
        return f"{kids[0]} → {p}"
    if rel.kind is RelKind.OR:
        return f"{p} ↔ " + " ∨ ".join(kids)
    parts = []
    for k in kids:
        rhs = [f"¬{o}" for o in kids if o != k] + [p]
        parts.append(f"({k} ↔ {' ∧ '.join(rhs)})")
    return " ∧ ".join(parts)


def _ctc_clauses(ctc: CrossTreeConstraint, var) -> list[Clause]:
    a, b = var(ctc.lhs), var(ctc.rhs)
    if ctc.kind is CtcKind.REQUIRES:
        return [(-a, b)]
    return [(-a, -b)]


def _ctc_display(ctc: CrossTreeConstraint) -> str:
    if ctc.kind is CtcKind.REQUIRES:
        return f"{ctc.lhs} → {ctc.rhs}"
    return f"¬({ctc.lhs} ∧ {ctc.rhs})"


def encode(model: FeatureModel) -> ConstraintSet:
    """c0 fixes the root; relationships follow in model order, then cross-tree constraints."""
    index = {f: i for i, f in enumerate(model.features, 1)}
    var = index.__getitem__
    out = [
        LabeledConstraint("c0", ((var(model.root),),), RootConstraint(model.root), f"{model.root} = t")
    ]
    for rel in model.relationships:
        out.append(
            LabeledConstraint(
                f"c{len(out)}", tuple(_relationship_clauses(rel, var)), rel, _relationship_display(rel)
            )
        )
    for ctc in model.cross_tree:
        out.append(LabeledConstraint(f"c{len(out)}", tuple(_ctc_clauses(ctc, var)), ctc, _ctc_display(ctc)))
    return ConstraintSet(tuple(out), model.features)


def constraint_formula(constraint: LabeledConstraint | Provenance) -> Formula:
    """The logic formula a constraint stands for, built straight from its provenance.

    Independent of the clause conversion above, so it can serve as a
    truth-table reference for it.
    """
    prov = constraint.provenance if isinstance(constraint, LabeledConstraint) else constraint
    if isinstance(prov, RootConstraint):
        return Lit(prov.feature)
    if isinstance(prov, NegatedTest):
        return Not(prov.test.formula)
    if isinstance(prov, CrossTreeConstraint):
        a, b = Lit(prov.lhs), Lit(prov.rhs)
        if prov.kind is CtcKind.REQUIRES:
            return Implies(a, b)
        return Not(And((a, b)))
    p = Lit(prov.parent)
    kids = [Lit(c) for c in prov.children]
    if prov.kind is RelKind.MANDATORY:
        return Iff(p, kids[0])
    if prov.kind is RelKind.OPTIONAL:
        return Implies(kids[0], p)
    if prov.kind is RelKind.OR:
        return Iff(p, Or(tuple(kids)))
    parts = []
    for k in kids:
        rhs = [Lit(o.name, False) for o in kids if o != k] + [p]
        parts.append(Iff(k, And(tuple(rhs))))
    return And(tuple(parts))


# -- general formulas -------------------------------------------------------


def _clean(lits: Iterable[int]) -> Clause | None:
    """Drop repeated literals; None for a tautology."""
    seen: list[int] = []
    for lit in lits:
        if -lit in seen:
            return None
        if lit not in seen:
            seen.append(lit)
    return tuple(seen)


def _nnf(f: Formula, positive: bool = True) -> Formula:
    if isinstance(f, Lit):
        return f if positive else Lit(f.name, not f.value)
    if isinstance(f, Not):
        return _nnf(f.arg, not positive)
    if isinstance(f, And):
        parts = tuple(_nnf(a, positive) for a in f.args)
        return And(parts) if positive else Or(parts)
    if isinstance(f, Or):
        parts = tuple(_nnf(a, positive) for a in f.args)
        return Or(parts) if positive else And(parts)
    if isinstance(f, Implies):
        return _nnf(Or((Not(f.lhs), f.rhs)), positive)
    if isinstance(f, Iff):
        if positive:
            return Or((And((_nnf(f.lhs), _nnf(f.rhs))), And((_nnf(f.lhs, False), _nnf(f.rhs, False)))))
        return Or((And((_nnf(f.lhs), _nnf(f.rhs, False))), And((_nnf(f.lhs, False), _nnf(f.rhs)))))
    raise TypeError(f"not a formula: {f!r}")


def _flat(f: Formula, kind) -> list[Formula]:
    if isinstance(f, kind):
        return [x for a in f.args for x in _flat(a, kind)]
    return [f]


def _direct_cnf(f: Formula, var) -> list[Clause] | None:
    """CNF without auxiliaries when the NNF is already a conjunction of clauses."""
    clauses = []
    for conjunct in _flat(_nnf(f), And):
        lits = []
        for d in _flat(conjunct, Or):
            if not isinstance(d, Lit):
                return None
            lits.append(var(d.name) if d.value else -var(d.name))
        clause = _clean(lits)
        if clause is not None:
            clauses.append(clause)
    return clauses


def encode_formula(
    formula: Formula, variables: Mapping[str, int] | ConstraintSet, aux_start: int | None = None
) -> list[Clause]:
    """Equisatisfiable CNF for ``formula``.

    Literal conjunctions become unit clauses; formulas whose negation normal
    form is already clausal are emitted directly; anything else goes through
    a Tseitin transformation whose fresh variables start at ``aux_start``
    (default: one past the last feature variable).
    """
    if isinstance(variables, ConstraintSet):
        table = variables._index
    else:
        table = variables

    def var(name):
        try:
            return table[name]
        except KeyError:
            raise ModelError(f"unknown feature {name!r}") from None

    lits = literal_conjunction(formula)
    if lits is not None:
        return [(var(l.name) if l.value else -var(l.name),) for l in lits]
    direct = _direct_cnf(formula, var)
    if direct is not None:
        return direct

    next_var = aux_start if aux_start is not None else max(table.values(), default=0) + 1
    clauses: list[Clause] = []

    def emit(*ls):
        clause = _clean(ls)
        if clause is not None:
            clauses.append(clause)

    def fresh():
        nonlocal next_var
        next_var += 1
        return next_var - 1

    def walk(f: Formula) -> int:
        if isinstance(f, Lit):
            return var(f.name) if f.value else -var(f.name)
        if isinstance(f, Not):
            return -walk(f.arg)
        if isinstance(f, Implies):
            f = Or((Not(f.lhs), f.rhs))
        if isinstance(f, And):
            parts = [walk(a) for a in f.args]
            x = fresh()
            for p in parts:
                emit(-x, p)
            emit(x, *(-p for p in parts))
            return x
        if isinstance(f, Or):
            parts = [walk(a) for a in f.args]
            x = fresh()
            emit(-x, *parts)
            for p in parts:
                emit(x, -p)
            return x
        if isinstance(f, Iff):
            l, r = walk(f.lhs), walk(f.rhs)
            x = fresh()
            emit(-x, -l, r)
            emit(-x, l, -r)
            emit(x, l, r)
            emit(x, -l, -r)
            return x
        raise TypeError(f"not a formula: {f!r}")

    emit(walk(formula))
    return clauses


def max_var(clauses: Iterable[Sequence[int]]) -> int:
    return max((abs(l) for c in clauses for l in c), default=0)


def dump_dimacs(cs: ConstraintSet) -> str:
    """Text dump with one ``c label`` comment per constraint giving its clause range."""
    clauses = cs.all_clauses()
    lines = [f"p cnf {cs.num_vars} {len(clauses)}"]
    for i, name in enumerate(cs.variables, 1):
        lines.append(f"c var {i} {name}")
    start = 1
    for c in cs.constraints:
        end = start + len(c.clauses) - 1
        lines.append(f"c label {c.label} clauses {start}..{end} :: {c.display}")
        start = end + 1
    lines += [" ".join(map(str, cl)) + " 0" for cl in clauses]
    return "\n".join(lines) + "\n"
