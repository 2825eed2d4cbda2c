from pathlib import Path

import pytest

from fex.corpus import build_corpus
from fex.progmodel import build_program_model
from fex.project import SourceProject

FIXTURES = Path(__file__).parent / "fixtures"

GRBL_DIR = FIXTURES / "grbl_like"
SYNTHETIC_DIR = FIXTURES / "synthetic"
CALLS_DIR = FIXTURES / "calls"

# The line sets of the worked example, pinned by hand from the fixture.
GRBL_SEED_LINES = {2, 6, 7, 9, 10, 14}
GRBL_SLICE_LINES = [1, 2, 3, 6, 7, 8, 9, 10, 11, 14, 15, 16, 18]


@pytest.fixture(scope="session")
def grbl_project():
    return SourceProject.load(GRBL_DIR)


@pytest.fixture(scope="session")
def grbl_corpus(grbl_project):
    return build_corpus(grbl_project, reduction_rank="auto")


@pytest.fixture(scope="session")
def grbl_model(grbl_project):
    return build_program_model(grbl_project)


@pytest.fixture(scope="session")
def synthetic_project():
    return SourceProject.load(SYNTHETIC_DIR)


@pytest.fixture(scope="session")
def synthetic_corpus(synthetic_project):
    return build_corpus(synthetic_project, reduction_rank="auto")


@pytest.fixture(scope="session")
def synthetic_model(synthetic_project):
    return build_program_model(synthetic_project)


@pytest.fixture(scope="session")
def calls_project():
    return SourceProject.load(CALLS_DIR)
