import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from veilaudit import bench

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_corpus():
    """400 committed tags over 100 users through the full pipeline."""
    return bench.build_corpus(bench.WorkloadSpec(B=400, S=100, k_bar=4.0, seed=11))


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
