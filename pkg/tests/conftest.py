import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

REFERENCE_STATIONS = np.array([(6000, 0), (3000, -6000), (-3000, -5000), (-6000, -1000),
                           (-4000, 6000), (0, 5000), (4000, 6000), (-6000, 4000)], dtype=float)
MS = (2000.0, 1000.0)


@pytest.fixture
def stations():
    return REFERENCE_STATIONS.copy()


@pytest.fixture
def ms():
    return MS


@pytest.fixture
def exact_ranges(stations):
    return np.hypot(*(stations - np.array(MS)).T)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
