import numpy as np
import pytest

from mediated_gates.models.schemas import OptimizerConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long synthesis tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running synthesis; needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quick_cfg():
    """Small multistart budget for tests that only exercise the search machinery."""
    return OptimizerConfig(restarts=8, polish_candidates=2, polish_rounds=4, max_iterations=4000)


@pytest.fixture
def output_dir(tmp_path):
    out = tmp_path / "reports"
    out.mkdir()
    return out
