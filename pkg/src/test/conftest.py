"""
Shared test setup: makes the fdqe package under src/main importable and keeps logging quiet between tests.
"""

import logging as log
import os
import sys

import pytest

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), os.pardir, "main"))


@pytest.fixture(autouse = True)
def reset_logging():
    yield
    for handler in log.getLogger().handlers[:]:
        log.getLogger().removeHandler(handler)
        handler.close()
