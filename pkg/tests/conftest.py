import numpy as np
import pytest
from hypothesis import strategies as st

from cpinvest.model import market_from_products

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def symmetric3():
    return market_from_products([3, 3], [1, 1])


@pytest.fixture
def asymmetric32():
    return market_from_products([3, 2], [1, 1])


@pytest.fixture
def weak11():
    return market_from_products([1, 1], [1, 1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@st.composite
def markets(draw, max_n=6, ra=(0.5, 8.0), b=(1.0, 3.0)):
    n = draw(st.integers(1, max_n))
    ras = draw(st.lists(st.floats(*ra), min_size=n, max_size=n))
    bs = draw(st.lists(st.floats(*b), min_size=n, max_size=n))
    return market_from_products(ras, bs)
