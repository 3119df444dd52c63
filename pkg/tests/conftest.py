import contextlib

import numpy as np
import pytest

from freeflight.kkt import find_reference_optimum
from freeflight.timefunctional import ProblemSpec
from freeflight.windfield import benchmark_field, zero_field


@pytest.fixture(scope="session")
def field():
    return benchmark_field()


@pytest.fixture(scope="session")
def bench256(field):
    return ProblemSpec(field, 1.0, 256)


@pytest.fixture(scope="session")
def ref256(bench256):
    return find_reference_optimum(bench256)


@pytest.fixture(scope="session")
def still64():
    return ProblemSpec(zero_field(), 1.0, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20231014)


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """``with criterion(n, title):`` records one PASS/FAIL line for the acceptance summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    @contextlib.contextmanager
    def record(n, title):
        try:
            yield
        except BaseException:
            lines[n] = f"criterion {n} FAIL  {title}"
            raise
        lines[n] = f"criterion {n} PASS  {title}"

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
