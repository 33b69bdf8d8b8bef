import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def within_sigma(observed: float, expected: float, n: int, sigmas: float = 3.0) -> bool:
    se = np.sqrt(expected * (1 - expected) / n)
    return abs(observed - expected) <= sigmas * se


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
