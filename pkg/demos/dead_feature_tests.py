"""
From analysis to test cases
===========================

Analysis flags nolicense as dead.  Turning "no feature may be dead" into
positive tests lets the debugger point at the constraints responsible.
"""
from fmdiag import analyze, debug, encode, example_path, generate_tests, parse_model

model = parse_model(example_path("survey.fm").read_text())
cs = encode(model)
print(analyze(cs, model).format())

tests = generate_tests(model, {"dead"})
print("generated:", ", ".join(str(t.formula) for t in tests))

result = debug(cs, tests)
print("active tests:", result.active_tests)
print("delta:", result.delta)

# delete the diagnosis and analyze again
repaired = cs.without(result.delta)
print(analyze(repaired, model).format())
