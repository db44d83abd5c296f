"""Automated testing and debugging of feature models.

Typical use::

    from fmdiag import parse_model, parse_test_suite, encode, debug

    model = parse_model(open("survey.fm").read())
    positives, negatives = parse_test_suite(open("survey.tc").read(), model)
    result = debug(encode(model), positives, negatives)
    print(result.delta)
"""

from importlib import resources

from .analysis import AnalysisReport, analyze, generate_tests
from .debug import (
    DebugSession,
    DiagnosisResult,
    InvalidConsiderationSet,
    NoDiagnosisPossible,
    TooLarge,
    debug,
    diagnose,
    is_diagnosis,
    oracle_all_minimal_diagnoses,
    preprocess,
    verify_minimal,
)
from .encode import ConstraintSet, LabeledConstraint, encode, encode_formula
from .errors import FMDiagError, ModelError, ParseError
from .model import (
    CrossTreeConstraint,
    FeatureModel,
    Formula,
    Polarity,
    Relationship,
    TestCase,
    parse_formula,
    parse_model,
    parse_test_suite,
    serialize_model,
    serialize_test_suite,
)
from .sat import ClauseDB, SatResult, SatSolver, solve
from .synth import SynthParams, synth_model, synth_tests

__version__ = "0.1.0"


def example_path(name: str):
    """Path of a bundled example file (``survey.fm``, ``survey.tc``)."""
    return resources.files(__name__) / "data" / name
