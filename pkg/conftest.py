import numpy as np
import pytest
from click.testing import CliRunner
from pytest_socket import disable_socket


def pytest_addoption(parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="run slow acceptance-scale tests",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test as slow")


def pytest_runtest_setup(item):
    disable_socket(allow_unix_socket=True)


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        # Collect all tests, including the slow ones
        return

    skip_slow = pytest.mark.skip(reason="slow test")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def runner():
    return CliRunner()
