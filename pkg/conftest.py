# conftest.py
import os
from pathlib import Path

import hypothesis
import numpy as np
import pytest

import jsonio

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def fixture_path():
    def _path(name):
        return FIXTURES / name
    return _path


@pytest.fixture
def load_fixture(fixture_path):
    def _load(name):
        return jsonio.load_path(fixture_path(name))
    return _load
