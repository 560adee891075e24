""" conftest.py
Pytest hooks that gate the long-running training experiments behind --runslow.
"""
# Package Header #
from src.neuralign.header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Standard Libraries #

# Third-Party Packages #
import pytest

# Local Packages #


# Functions #
def pytest_addoption(parser):
    """Adds the option that enables the long-running experiment tests."""
    parser.addoption("--runslow", action="store_true", default=False, help="run the slow experiment tests")


def pytest_configure(config):
    """Registers the markers used by the test suite."""
    config.addinivalue_line("markers", "slow: long-running experiment test, skipped unless --runslow is given")


def pytest_collection_modifyitems(config, items):
    """Skips the slow tests unless they were requested."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)
