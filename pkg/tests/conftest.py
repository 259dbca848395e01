import os
import sys

import pytest

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
MOCK_ENGINE = os.path.join(os.path.dirname(__file__), "mock_engine.py")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def mock_engine_cmd():
    return (sys.executable, MOCK_ENGINE)
