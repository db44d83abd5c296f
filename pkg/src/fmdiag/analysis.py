"""Well-formedness checks (void model, dead features, false optionals) and
dead-feature test generation."""

from __future__ import annotations

from dataclasses import dataclass

from .encode import ConstraintSet
from .model import FeatureModel, Lit, Polarity, RelKind, TestCase
from .sat import ClauseDB, SatSolver


@dataclass(frozen=True)
class AnalysisReport:
    void: bool
    dead_features: tuple[str, ...] = ()
    false_optionals: tuple[str, ...] = ()

    def format(self) -> str:
        return (
            f"void: {'yes' if self.void else 'no'}\n"
            f"dead:{''.join(' ' + f for f in self.dead_features)}\n"
            f"false-optional:{''.join(' ' + f for f in self.false_optionals)}\n"
        )


def analyze(cs: ConstraintSet, model: FeatureModel, solver: SatSolver | None = None) -> AnalysisReport:
    """Run the three checks against every constraint in ``cs`` (c0 included).

    ``cs`` may be a reduced constraint set (for instance with a diagnosis
    removed); parent links for the false-optional check come from ``model``.
    A void model reports empty lists after a single solver call; otherwise
    the cost is one call per feature plus one per non-mandatory feature.
    """
    solver = solver or SatSolver()
    db = ClauseDB(cs.num_vars, cs.all_clauses())
    if not solver.solve(db):
        return AnalysisReport(void=True)

    dead = [f for f in model.features if not solver.solve(db, [(cs.var(f),)])]
    dead_set = set(dead)
    false_optional = []
    for f in model.features:
        rel = model.relationship_of(f)
        if rel is None or rel.kind is RelKind.MANDATORY:
            continue
        forced = not solver.solve(db, [(cs.var(rel.parent),), (-cs.var(f),)])
        if forced and f not in dead_set:
            false_optional.append(f)
    return AnalysisReport(False, tuple(dead), tuple(false_optional))


def generate_tests(model: FeatureModel, kinds=("dead",)) -> list[TestCase]:
    """One positive ``f=t`` test per non-root feature, guarding against dead features."""
    kinds = {str(k).lower() for k in kinds}
    unknown = kinds - {"dead", "deadfeature"}
    if unknown:
        raise ValueError(f"unsupported test kind(s): {', '.join(sorted(unknown))}")
    if not kinds:
        return []
    return [
        TestCase(f"gen_dead_{f}", Lit(f, True), Polarity.POSITIVE) for f in model.features if f != model.root
    ]
