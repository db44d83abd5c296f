"""Feature model types, propositional formulas and the two text formats.

Model files (``.fm``) hold one statement per line::

    feature <name> root
    feature <name>                 # optional explicit declaration
    mandatory <parent> <child>
    optional <parent> <child>
    alternative <parent> <child1> <child2> [...]
    or <parent> <child1> <child2> [...]
    requires <a> <b>
    excludes <a> <b>

Test-suite files (``.tc``) hold ``positive <expr>`` or ``negative <expr>``
lines.  Expressions use ``<->``, ``->``, ``|``, ``&`` and ``!`` (loosest to
tightest binding) over atoms ``name=t`` / ``name=f``; a bare ``name`` means
``name=t``.  Because feature names may contain ``&`` (``Q&A``), an ``&``
written directly after a name character is part of the name: put spaces
around the conjunction operator when it follows a bare name.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .errors import ModelError, ParseError

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_&]*\Z")
_NAME_START = re.compile(r"[A-Za-z_]")
_NAME_CHAR = re.compile(r"[A-Za-z0-9_&]")


class RelKind(str, enum.Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"
    ALTERNATIVE = "alternative"
    OR = "or"

    @property
    def is_group(self):
        return self in (RelKind.ALTERNATIVE, RelKind.OR)


class CtcKind(str, enum.Enum):
    REQUIRES = "requires"
    EXCLUDES = "excludes"


@dataclass(frozen=True)
class Relationship:
    kind: RelKind
    parent: str
    children: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", RelKind(self.kind))
        object.__setattr__(self, "children", tuple(self.children))
        if not self.children:
            raise ModelError(f"{self.kind.value} relationship without children")
        if self.kind.is_group:
            if len(self.children) < 2:
                raise ModelError(
                    f"{self.kind.value} group under {self.parent!r} needs at least 2 children"
                )
        elif len(self.children) != 1:
            raise ModelError(f"{self.kind.value} relationship takes exactly one child")


@dataclass(frozen=True)
class CrossTreeConstraint:
    kind: CtcKind
    lhs: str
    rhs: str

    def __post_init__(self):
        object.__setattr__(self, "kind", CtcKind(self.kind))
        if self.lhs == self.rhs:
            raise ModelError(f"{self.kind.value} constraint relates {self.lhs!r} to itself")


@dataclass(frozen=True)
class FeatureModel:
    """A rooted feature tree plus cross-tree constraints.

    Construction validates the tree invariants and raises :class:`ModelError`
    on violation, so every instance in circulation is well formed.
    """

    features: tuple[str, ...]
    root: str
    relationships: tuple[Relationship, ...] = ()
    cross_tree: tuple[CrossTreeConstraint, ...] = ()
    _parent: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "relationships", tuple(self.relationships))
        object.__setattr__(self, "cross_tree", tuple(self.cross_tree))
        self._validate()

    def _validate(self):
        known = set()
        for name in self.features:
            if not isinstance(name, str) or not NAME_RE.match(name):
                raise ModelError(f"invalid feature name {name!r}")
            if name in known:
                raise ModelError(f"duplicate feature {name!r}")
            known.add(name)
        if self.root not in known:
            raise ModelError(f"root {self.root!r} is not a declared feature")
        parent = {}
        for rel in self.relationships:
            if rel.parent not in known:
                raise ModelError(f"unknown feature {rel.parent!r}")
            if len(set(rel.children)) != len(rel.children):
                raise ModelError(f"repeated child in group under {rel.parent!r}")
            for child in rel.children:
                if child not in known:
                    raise ModelError(f"unknown feature {child!r}")
                if child == self.root:
                    raise ModelError(f"root {child!r} cannot be a child")
                if child in parent:
                    raise ModelError(f"feature {child!r} is the child of more than one relationship")
                parent[child] = rel
        for name in self.features:
            if name != self.root and name not in parent:
                raise ModelError(f"feature {name!r} is not attached to the tree")
        # every chain of parents must end at the root
        for name in self.features:
            seen = set()
            cur = name
            while cur != self.root:
                if cur in seen:
                    raise ModelError(f"cycle through feature {cur!r}")
                seen.add(cur)
                cur = parent[cur].parent
        for ctc in self.cross_tree:
            for name in (ctc.lhs, ctc.rhs):
                if name not in known:
                    raise ModelError(f"unknown feature {name!r}")
        object.__setattr__(self, "_parent", parent)

    def relationship_of(self, feature: str) -> Relationship | None:
        """The relationship in which ``feature`` is a child (None for the root)."""
        return self._parent.get(feature)

    def parent(self, feature: str) -> str | None:
        rel = self._parent.get(feature)
        return rel.parent if rel else None

    def ancestors(self, feature: str) -> list[str]:
        out = []
        cur = self.parent(feature)
        while cur is not None:
            out.append(cur)
            cur = self.parent(cur)
        return out


# -- formulas ---------------------------------------------------------------

_IFF, _IMPLIES, _OR, _AND, _NOT, _ATOM = range(6)


class Formula:
    """Base class of the propositional expression tree."""

    prec = _ATOM

    def evaluate(self, assignment: Mapping[str, bool]) -> bool:
        raise NotImplementedError

    def atoms(self) -> set[str]:
        raise NotImplementedError

    def _wrap(self, child: "Formula", strict: bool) -> str:
        text = str(child)
        if child.prec < self.prec or (strict and child.prec == self.prec):
            return f"({text})"
        return text


@dataclass(frozen=True)
class Lit(Formula):
    name: str
    value: bool = True

    def evaluate(self, assignment):
        return assignment[self.name] == self.value

    def atoms(self):
        return {self.name}

    def __str__(self):
        return f"{self.name}={'t' if self.value else 'f'}"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula
    prec = _NOT

    def evaluate(self, assignment):
        return not self.arg.evaluate(assignment)

    def atoms(self):
        return self.arg.atoms()

    def __str__(self):
        return "!" + self._wrap(self.arg, strict=False)


@dataclass(frozen=True)
class And(Formula):
    args: tuple[Formula, ...]
    prec = _AND

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("And needs at least two operands")

    def evaluate(self, assignment):
        return all(a.evaluate(assignment) for a in self.args)

    def atoms(self):
        return set().union(*(a.atoms() for a in self.args))

    def __str__(self):
        return " & ".join(self._wrap(a, strict=True) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple[Formula, ...]
    prec = _OR

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 2:
            raise ValueError("Or needs at least two operands")

    def evaluate(self, assignment):
        return any(a.evaluate(assignment) for a in self.args)

    def atoms(self):
        return set().union(*(a.atoms() for a in self.args))

    def __str__(self):
        return " | ".join(self._wrap(a, strict=True) for a in self.args)


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula
    prec = _IMPLIES

    def evaluate(self, assignment):
        return (not self.lhs.evaluate(assignment)) or self.rhs.evaluate(assignment)

    def atoms(self):
        return self.lhs.atoms() | self.rhs.atoms()

    def __str__(self):
        # right associative
        return f"{self._wrap(self.lhs, strict=True)} -> {self._wrap(self.rhs, strict=False)}"


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula
    prec = _IFF

    def evaluate(self, assignment):
        return self.lhs.evaluate(assignment) == self.rhs.evaluate(assignment)

    def atoms(self):
        return self.lhs.atoms() | self.rhs.atoms()

    def __str__(self):
        # left associative
        return f"{self._wrap(self.lhs, strict=False)} <-> {self._wrap(self.rhs, strict=True)}"


def literal_conjunction(formula: Formula) -> list[Lit] | None:
    """Return the literals if ``formula`` is a literal or a conjunction of them."""
    if isinstance(formula, Lit):
        return [formula]
    if isinstance(formula, And) and all(isinstance(a, Lit) for a in formula.args):
        return list(formula.args)
    return None


class Polarity(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class TestCase:
    """A labeled formula; positives must be satisfiable, negatives must not."""

    __test__ = False  # not a pytest class

    label: str
    formula: Formula
    polarity: Polarity = Polarity.POSITIVE

    def __str__(self):
        return f"{self.label}: {self.formula}"


# -- expression parser ------------------------------------------------------

_Token = tuple  # (kind, text, column)


def _tokenize(text: str, line: int | None, col0: int = 1) -> list[_Token]:
    toks = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = col0 + i
        if text.startswith("<->", i):
            toks.append(("IFF", "<->", col))
            i += 3
        elif text.startswith("->", i):
            toks.append(("IMPLIES", "->", col))
            i += 2
        elif ch in "()!&|":
            toks.append((ch, ch, col))
            i += 1
        elif _NAME_START.match(ch):
            j = i + 1
            while j < n and _NAME_CHAR.match(text[j]):
                j += 1
            name = text[i:j]
            k = j
            while k < n and text[k] in " \t":
                k += 1
            value = True
            if k < n and text[k] == "=":
                k += 1
                while k < n and text[k] in " \t":
                    k += 1
                if k >= n or text[k] not in "tf" or (
                    k + 1 < n and re.match(r"[A-Za-z0-9_]", text[k + 1])
                ):
                    raise ParseError("expected 't' or 'f' after '='", line, col0 + k)
                value = text[k] == "t"
                j = k + 1
            toks.append(("ATOM", (name, value), col))
            i = j
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(("EOF", "", col0 + n))
    return toks


class _ExprParser:
    def __init__(self, text, line, col0):
        self.toks = _tokenize(text, line, col0)
        self.pos = 0
        self.line = line

    def peek(self):
        return self.toks[self.pos]

    def take(self, kind):
        tok = self.toks[self.pos]
        if tok[0] != kind:
            what = "end of expression" if tok[0] == "EOF" else repr(tok[1])
            raise ParseError(f"expected {kind}, found {what}", self.line, tok[2])
        self.pos += 1
        return tok

    def parse(self):
        expr = self.iff()
        self.take("EOF")
        return expr

    def iff(self):
        left = self.implies()
        while self.peek()[0] == "IFF":
            self.pos += 1
            left = Iff(left, self.implies())
        return left

    def implies(self):
        left = self.disj()
        if self.peek()[0] == "IMPLIES":
            self.pos += 1
            return Implies(left, self.implies())
        return left

    def disj(self):
        args = [self.conj()]
        while self.peek()[0] == "|":
            self.pos += 1
            args.append(self.conj())
        return args[0] if len(args) == 1 else Or(tuple(args))

    def conj(self):
        args = [self.unary()]
        while self.peek()[0] == "&":
            self.pos += 1
            args.append(self.unary())
        return args[0] if len(args) == 1 else And(tuple(args))

    def unary(self):
        tok = self.peek()
        if tok[0] == "!":
            self.pos += 1
            return Not(self.unary())
        if tok[0] == "(":
            self.pos += 1
            inner = self.iff()
            self.take(")")
            return inner
        if tok[0] == "ATOM":
            self.pos += 1
            name, value = tok[1]
            return Lit(name, value)
        what = "end of expression" if tok[0] == "EOF" else repr(tok[1])
        raise ParseError(f"expected a literal or '(', found {what}", self.line, tok[2])


def parse_formula(text: str, line: int | None = None, column: int = 1) -> Formula:
    """Parse one test-case expression such as ``ABtesting & license -> statistics``."""
    return _ExprParser(text, line, column).parse()


# -- model file -------------------------------------------------------------

_ARITY = {
    "mandatory": (2, 2),
    "optional": (2, 2),
    "alternative": (3, None),
    "or": (3, None),
    "requires": (2, 2),
    "excludes": (2, 2),
}


def _lines(text: str | bytes):
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8 (byte offset {exc.start})") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        yield lineno, raw.split("#", 1)[0]


def parse_model(text: str | bytes) -> FeatureModel:
    """Parse the line-oriented model format into a validated :class:`FeatureModel`."""
    features: list[str] = []
    declared_at: dict[str, tuple[int, int]] = {}
    explicit: set[str] = set()
    root = None
    child_of: dict[str, int] = {}
    relationships: list[Relationship] = []
    cross_tree: list[CrossTreeConstraint] = []
    references: list[tuple[str, int, int]] = []

    def introduce(name, lineno, col):
        if name not in declared_at:
            declared_at[name] = (lineno, col)
            features.append(name)

    for lineno, body in _lines(text):
        words = [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", body)]
        if not words:
            continue
        keyword, kcol = words[0]
        args = words[1:]
        if keyword != "feature" and keyword not in _ARITY:
            raise ParseError(f"unknown statement {keyword!r}", lineno, kcol)
        for name, col in args:
            if not NAME_RE.match(name):
                raise ParseError(f"invalid feature name {name!r}", lineno, col)

        if keyword == "feature":
            if len(args) == 2 and args[1][0] == "root":
                is_root = True
            elif len(args) == 1:
                is_root = False
            else:
                raise ParseError("expected 'feature <name> [root]'", lineno, kcol)
            name, col = args[0]
            if name in explicit:
                raise ModelError(f"duplicate feature {name!r}", lineno, col)
            if name in child_of and is_root:
                raise ModelError(f"root {name!r} cannot be a child", lineno, col)
            explicit.add(name)
            if is_root:
                if root is not None:
                    raise ModelError(f"multiple roots ({root!r} and {name!r})", lineno, col)
                root = name
            introduce(name, lineno, col)
            continue

        lo, hi = _ARITY[keyword]
        if len(args) < lo or (hi is not None and len(args) > hi):
            if keyword in ("alternative", "or") and len(args) == 2:
                raise ModelError(f"{keyword} group needs at least 2 children", lineno, kcol)
            raise ParseError(f"wrong number of operands for {keyword!r}", lineno, kcol)

        if keyword in ("requires", "excludes"):
            (a, acol), (b, bcol) = args
            if a == b:
                raise ModelError(f"{keyword} constraint relates {a!r} to itself", lineno, bcol)
            references.append((a, lineno, acol))
            references.append((b, lineno, bcol))
            cross_tree.append(CrossTreeConstraint(CtcKind(keyword), a, b))
            continue

        (parent, pcol), kids = args[0], args[1:]
        references.append((parent, lineno, pcol))
        seen = set()
        for child, ccol in kids:
            if child in seen:
                raise ModelError(f"repeated child {child!r}", lineno, ccol)
            seen.add(child)
            if child == parent:
                raise ModelError(f"feature {child!r} cannot be its own child", lineno, ccol)
            if child == root:
                raise ModelError(f"root {child!r} cannot be a child", lineno, ccol)
            if child in child_of:
                raise ModelError(
                    f"feature {child!r} is already a child (line {child_of[child]}); "
                    "not a tree",
                    lineno,
                    ccol,
                )
            child_of[child] = lineno
            introduce(child, lineno, ccol)
        relationships.append(Relationship(RelKind(keyword), parent, tuple(k for k, _ in kids)))

    if root is None:
        raise ModelError("no root feature declared (expected 'feature <name> root')")
    for name, lineno, col in references:
        if name not in declared_at:
            raise ModelError(f"unknown feature {name!r}", lineno, col)
    for name in features:
        if name != root and name not in child_of:
            lineno, col = declared_at[name]
            raise ModelError(f"feature {name!r} is not attached to the tree", lineno, col)
    return FeatureModel(tuple(features), root, tuple(relationships), tuple(cross_tree))


def serialize_model(model: FeatureModel) -> str:
    out = [f"feature {model.root} root"]
    out += [f"feature {f}" for f in model.features if f != model.root]
    for rel in model.relationships:
        out.append(" ".join([rel.kind.value, rel.parent, *rel.children]))
    for ctc in model.cross_tree:
        out.append(f"{ctc.kind.value} {ctc.lhs} {ctc.rhs}")
    return "\n".join(out) + "\n"


# -- test-suite file --------------------------------------------------------


def parse_test_suite(
    text: str | bytes, model: FeatureModel | None = None
) -> tuple[list[TestCase], list[TestCase]]:
    """Parse ``positive``/``negative`` lines; labels t1, t2, ... restart per polarity.

    When ``model`` is given, every atom must name one of its features.
    """
    positives: list[TestCase] = []
    negatives: list[TestCase] = []
    known = set(model.features) if model is not None else None
    for lineno, body in _lines(text):
        m = re.match(r"\s*(\S+)", body)
        if not m:
            continue
        keyword = m.group(1)
        if keyword not in ("positive", "negative"):
            raise ParseError(f"expected 'positive' or 'negative', found {keyword!r}", lineno, 1 + m.start(1))
        rest = body[m.end():]
        formula = parse_formula(rest, lineno, m.end() + 1)
        if known is not None:
            unknown = sorted(formula.atoms() - known)
            if unknown:
                raise ModelError(f"unknown feature {unknown[0]!r}", lineno)
        target = positives if keyword == "positive" else negatives
        target.append(TestCase(f"t{len(target) + 1}", formula, Polarity(keyword)))
    return positives, negatives


def serialize_test_suite(positives: Iterable[TestCase], negatives: Iterable[TestCase] = ()) -> str:
    lines = [f"positive {t.formula}" for t in positives]
    lines += [f"negative {t.formula}" for t in negatives]
    return "".join(line + "\n" for line in lines)


FormulaLike = Union[Formula, str]


def as_formula(value: FormulaLike) -> Formula:
    return parse_formula(value) if isinstance(value, str) else value
