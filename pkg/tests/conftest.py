import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from ktfr import Signal  # noqa: E402
from ktfr.signal import random_analytic  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def noise64():
    return random_analytic(64, 3)


@pytest.fixture
def real_noise():
    return Signal(np.random.default_rng(5).standard_normal(96))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
