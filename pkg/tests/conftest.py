import math

import pytest

from ladderlab.ladder import build_ladder
from ladderlab.segments import window_requirement

K_DEFAULT = 3


def _table(T, k=K_DEFAULT, tol=1e-8):
    lo, hi = window_requirement(T, k)
    return build_ladder(lo, hi, tol)


@pytest.fixture(scope="session")
def ladder_1e4():
    return _table(1e4)


@pytest.fixture(scope="session")
def ladder_1e5():
    return _table(1e5)


@pytest.fixture(scope="session")
def ladders(ladder_1e4, ladder_1e5):
    return {1e4: ladder_1e4, 1e5: ladder_1e5}


@pytest.fixture(scope="session")
def small_ladder():
    """A short window at T = 1e3 for cheap property tests."""
    T = 1e3
    g = (1 - 0.57721566490153286061) * T / math.log(T)
    return build_ladder(T - g, T + 2 * g, 1e-8)


def pytest_terminal_summary(terminalreporter):
    from _acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
