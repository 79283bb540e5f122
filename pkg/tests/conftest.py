import sys

import numpy as np
import pytest

from kissmax import NormedSpace
from kissmax.geometry import INF

NORMS = [1.0, 1.5, 2.0, 3.0, INF]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def spaces(dims=(1, 2, 3)):
    return [NormedSpace(d, p) for d in dims for p in NORMS]


def pytest_terminal_summary(terminalreporter):
    lines = sys.modules.get("test_acceptance")
    lines = getattr(lines, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines.values():
            terminalreporter.write_line(line)
