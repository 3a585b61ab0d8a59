import math

import numpy as np
import pytest

from lsiwave.model import ground_state_profile, make_params
from lsiwave.spectral import PeriodicGrid

BETA, C, OMEGA = math.sqrt(2.0), 2.0, 2.0


@pytest.fixture(scope="session")
def params():
    return make_params(BETA, C, OMEGA)


@pytest.fixture(scope="session")
def grid():
    return PeriodicGrid(1024, 80.0)


@pytest.fixture(scope="session")
def profile(params, grid):
    return ground_state_profile(params, math.pi / 4, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_random(grid, rng, modes=20, complex_=False):
    """Band-limited random field decaying away from the centre."""
    k = np.abs(grid.k) <= modes * 2 * np.pi / grid.length
    c = rng.standard_normal(grid.n) * k
    if complex_:
        c = c + 1j * rng.standard_normal(grid.n) * k
    f = np.fft.ifft(c)
    f = f if complex_ else f.real
    return f * np.exp(-(grid.x / 8) ** 2)


# acceptance verdicts, one line per criterion, echoed in the terminal summary
ACCEPTANCE = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
