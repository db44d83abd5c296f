"""Seeded random feature models and test suites for benchmarking.

A model for ``num_constraints = N`` has ``N // 2`` features.  The tree is
grown by attaching new features under a uniformly chosen existing one;
cross-tree ``requires``/``excludes`` constraints between unrelated
features then fill the constraint count up to exactly N.  Candidate
cross-tree constraints that would make the model void are skipped.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass

from .encode import encode, encode_formula
from .errors import FMDiagError
from .model import (
    And,
    CrossTreeConstraint,
    CtcKind,
    FeatureModel,
    Lit,
    Polarity,
    Relationship,
    RelKind,
    TestCase,
)
from .sat import ClauseDB, SatSolver, satisfies

KINDS = (RelKind.MANDATORY, RelKind.OPTIONAL, RelKind.ALTERNATIVE, RelKind.OR)
DEFAULT_KIND_WEIGHTS = (0.25, 0.35, 0.20, 0.20)


class Infeasible(FMDiagError):
    pass


class ShareUnreachable(FMDiagError):
    pass


@dataclass(frozen=True)
class SynthParams:
    num_constraints: int
    seed: int = 0
    num_tests: int = 0
    inconsistency_share: float = 0.30
    ctc_ratio: float = 0.2  # minimum share of cross-tree constraints in CF - {c0}
    kind_weights: tuple[float, float, float, float] = DEFAULT_KIND_WEIGHTS
    min_group: int = 2
    max_group: int = 4
    max_attempts: int = 50

    def __post_init__(self):
        if self.num_constraints < 2:
            raise ValueError("num_constraints must be at least 2 (one feature per two constraints)")
        if self.num_tests < 0:
            raise ValueError("num_tests must be non-negative")
        for name in ("inconsistency_share", "ctc_ratio"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.kind_weights) != 4 or min(self.kind_weights) < 0 or sum(self.kind_weights) <= 0:
            raise ValueError("kind_weights needs four non-negative weights")
        if not 2 <= self.min_group <= self.max_group:
            raise ValueError("group sizes must satisfy 2 <= min_group <= max_group")

    @property
    def num_variables(self) -> int:
        return self.num_constraints // 2

    @property
    def num_inducing(self) -> int:
        return math.ceil(self.inconsistency_share * self.num_tests - 1e-9)


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from any tuple of ints/strings."""
    digest = hashlib.sha256(":".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _grow_tree(rng: random.Random, features: list[str], p: SynthParams) -> list[Relationship]:
    existing = [features[0]]
    pending = features[1:]
    rels = []
    while pending:
        parent = rng.choice(existing)
        kind = rng.choices(KINDS, weights=p.kind_weights)[0]
        if kind.is_group and len(pending) < p.min_group:
            single = p.kind_weights[:2]
            kind = rng.choices(KINDS[:2], weights=single)[0] if sum(single) > 0 else RelKind.OPTIONAL
        size = min(rng.randint(p.min_group, p.max_group), len(pending)) if kind.is_group else 1
        children, pending = pending[:size], pending[size:]
        existing += children
        rels.append(Relationship(kind, parent, tuple(children)))
    return rels


def synth_model(p: SynthParams) -> FeatureModel:
    rng = random.Random(derive_seed(p.seed, "model"))
    features = [f"f{i}" for i in range(1, p.num_variables + 1)]
    for _ in range(p.max_attempts):
        rels = _grow_tree(rng, features, p)
        needed = p.num_constraints - len(rels)
        if needed / p.num_constraints < p.ctc_ratio:
            continue
        tree = FeatureModel(tuple(features), features[0], tuple(rels))
        ancestors = {f: set(tree.ancestors(f)) for f in features}
        candidates = []
        for i, a in enumerate(features):
            for b in features[i + 1:]:
                if a in ancestors[b] or b in ancestors[a]:
                    continue
                candidates += [
                    CrossTreeConstraint(CtcKind.REQUIRES, a, b),
                    CrossTreeConstraint(CtcKind.REQUIRES, b, a),
                    CrossTreeConstraint(CtcKind.EXCLUDES, a, b),
                ]
        if len(candidates) < needed:
            continue
        rng.shuffle(candidates)

        cs = encode(tree)
        clauses = cs.all_clauses()
        solver = SatSolver()
        witness = solver.solve(ClauseDB(cs.num_vars, clauses)).witness
        index = {f: i for i, f in enumerate(features, 1)}
        chosen = []
        for ctc in candidates:
            if len(chosen) == needed:
                break
            a, b = index[ctc.lhs], index[ctc.rhs]
            clause = (-a, b) if ctc.kind is CtcKind.REQUIRES else (-a, -b)
            if not satisfies(witness, [clause]):
                res = solver.solve(ClauseDB(cs.num_vars, clauses), [clause])
                if not res:
                    continue
                witness = res.witness
            clauses.append(clause)
            chosen.append(ctc)
        if len(chosen) < needed:
            continue
        model = FeatureModel(tuple(features), features[0], tuple(rels), tuple(chosen))
        assert len(encode(model)) == p.num_constraints + 1
        return model
    raise Infeasible(
        f"could not build a non-void model with exactly {p.num_constraints} constraints "
        f"over {p.num_variables} features in {p.max_attempts} attempts"
    )


def _conjunction(lits: list[Lit]):
    return lits[0] if len(lits) == 1 else And(tuple(lits))


def synth_tests(model: FeatureModel, p: SynthParams, attempts_per_test: int = 200) -> list[TestCase]:
    """Positive tests, exactly ``p.num_inducing`` of which conflict with the model.

    Tests are conjunctions of 1-4 literals over non-root features.
    Consistent ones are projections of randomly sampled configurations;
    conflicting ones are rejection sampled, falling back to negating a
    literal that the model forces.  When a small model has fewer distinct
    conflicting conjunctions than requested, some are repeated.
    """
    if p.num_tests == 0:
        return []
    rng = random.Random(derive_seed(p.seed, "tests"))
    cs = encode(model)
    db = ClauseDB(cs.num_vars, cs.all_clauses())
    solver = SatSolver()
    if not solver.solve(db):
        raise ShareUnreachable("model is void; no consistent test exists")
    features = [f for f in model.features if f != model.root]
    if not features:
        raise ShareUnreachable("model has no non-root features to test")
    n_bad = p.num_inducing
    widest = min(4, len(features))

    good = []
    for _ in range(p.num_tests - n_bad):
        values = cs.assignment(solver.solve(db, rng=rng).witness)
        picked = rng.sample(features, rng.randint(1, widest))
        good.append(_conjunction([Lit(f, values[f]) for f in picked]))

    bad, seen = [], set()
    for _ in range(attempts_per_test * n_bad):
        if len(bad) == n_bad:
            break
        picked = rng.sample(features, rng.randint(1, widest))
        lits = [Lit(f, rng.random() < 0.5) for f in picked]
        key = frozenset(lits)
        if key in seen:
            continue
        seen.add(key)
        formula = _conjunction(lits)
        if not solver.solve(db, encode_formula(formula, cs)):
            bad.append(formula)
    if len(bad) < n_bad:
        forced = []
        for f in features:
            for value in (True, False):
                if frozenset([Lit(f, value)]) not in seen and not solver.solve(db, [(cs.var(f) if value else -cs.var(f),)]):
                    forced.append(Lit(f, value))
        rng.shuffle(forced)
        bad += forced[: n_bad - len(bad)]
    if not bad and n_bad:
        raise ShareUnreachable("no inconsistency-inducing test exists among 1-4 literal conjunctions")
    if len(bad) < n_bad:
        # small models have fewer distinct conflicting conjunctions than requested; repeat some
        pool = list(bad)
        bad += [rng.choice(pool) for _ in range(n_bad - len(bad))]

    tagged = [(f, False) for f in good] + [(f, True) for f in bad]
    rng.shuffle(tagged)
    return [TestCase(f"t{i}", f, Polarity.POSITIVE) for i, (f, _) in enumerate(tagged, 1)]
