import numpy as np
import pytest

from bersslice.character import CharacterTriple
from bersslice.moebius import Mat2C

ACCEPTANCE_LINES = []


def random_sl2(rng, scale=1.0):
    a, b, c = scale * (rng.normal(size=3) + 1j * rng.normal(size=3))
    return Mat2C(a, b, c, (1 + b * c) / a)


def markov_triple(x, y, larger=True):
    """z completing (x, y, z) to a solution of x^2 + y^2 + z^2 = xyz."""
    x, y = complex(x), complex(y)
    disc = np.sqrt(x * x * y * y - 4 * (x * x + y * y))
    z = (x * y + disc) / 2 if larger else (x * y - disc) / 2
    return CharacterTriple(x, y, z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
