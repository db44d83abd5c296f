import sys

import pytest

from fmdiag import encode, example_path, parse_model, parse_test_suite


@pytest.fixture(scope="session")
def survey_text():
    return example_path("survey.fm").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def survey(survey_text):
    return parse_model(survey_text)


@pytest.fixture(scope="session")
def survey_cs(survey):
    return encode(survey)


@pytest.fixture(scope="session")
def survey_tests(survey):
    positives, negatives = parse_test_suite(example_path("survey.tc").read_text(encoding="utf-8"), survey)
    return positives, negatives


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)
