import os

import pytest

from netcoding.rng import make_rng

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


@pytest.fixture
def rng():
    return make_rng(20240601)


@pytest.fixture
def fixture_dir():
    return os.path.join(PROJECT_ROOT, "data", "fixtures")


@pytest.fixture
def config_dir():
    return os.path.join(PROJECT_ROOT, "data", "configs")
