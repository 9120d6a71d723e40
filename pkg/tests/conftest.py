from __future__ import annotations

import pytest

from martylab.construct import construct_family
from martylab.numerics import DEFAULT_PRECISION, set_precision

# lines collected by test_acceptance and printed after the run
ACCEPTANCE_RESULTS: list[str] = []


@pytest.fixture(autouse=True)
def _default_precision():
    set_precision(DEFAULT_PRECISION)
    yield
    set_precision(DEFAULT_PRECISION)


@pytest.fixture(scope="session")
def family_k2():
    """Instance k0=2, alpha=3, C=1 with members n = 1..6."""
    set_precision(DEFAULT_PRECISION)
    return construct_family(2, 3, 1, range(1, 7))


@pytest.fixture(scope="session")
def family_k3():
    """Instance k0=3, alpha=1.5, C=0.5 with members n = 1..4."""
    set_precision(DEFAULT_PRECISION)
    return construct_family(3, "1.5", "0.5", range(1, 5))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
