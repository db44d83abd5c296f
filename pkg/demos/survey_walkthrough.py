"""
Debugging the survey feature model
==================================

The survey model ships with the package.  Four positive tests describe what
the product line should allow; three of them fail, and DirectDebug finds the
constraints to revisit.
"""
from fmdiag import encode, example_path, parse_model, parse_test_suite, preprocess, diagnose
from fmdiag import oracle_all_minimal_diagnoses

model = parse_model(example_path("survey.fm").read_text())
cs = encode(model)

# every constraint with its label, the order DirectDebug splits on
for c in cs:
    print(f"{c.label:>3}  {c.display}")

positives, negatives = parse_test_suite(example_path("survey.tc").read_text(), model)
session = preprocess(cs, None, positives, negatives)
print("\nstill failing:", [t.label for t in session.active], " filtered:", session.filtered)

result = diagnose(session)
print(result.report(trace=True))

# DirectDebug returns one minimal diagnosis; the exhaustive oracle lists them all
for d in sorted(oracle_all_minimal_diagnoses(session), key=len):
    print("minimal diagnosis:", sorted(d))
