import math

import pytest

from qszilard.ensemble import Statistics

ALL_STATS = [Statistics.BOSON, Statistics.FERMION, Statistics.DISTINGUISHABLE]


def rel_err(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def log_rel_err(log_a: float, log_b: float) -> float:
    """Relative error of exp(log_a) against exp(log_b)."""
    return abs(math.expm1(log_a - log_b))


@pytest.fixture(params=ALL_STATS, ids=lambda s: s.value)
def stat(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
