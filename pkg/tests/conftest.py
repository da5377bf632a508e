import pytest

from argudialog.engine import DialogueEngine
from argudialog.kb import builtin_case_study_kb


@pytest.fixture(scope="session")
def case_kb():
    return builtin_case_study_kb()


@pytest.fixture(scope="session")
def case_graph(case_kb):
    return case_kb.graph


@pytest.fixture(scope="session")
def engine(case_kb):
    return DialogueEngine(case_kb)
