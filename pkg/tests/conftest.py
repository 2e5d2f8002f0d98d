import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mixedq.model import ModelSpec, build_model

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# Two sectors, a lambda = 2 rotation in the first one.
TWO_SECTOR = ModelSpec.create([2, 1], [[0.5, 0.3], [0.3, -0.4]], [(0, (0, 1), 2.0)], level=5)
# Same shape with a different Q, used by the operator tests.
MIXED = ModelSpec.create([2, 1], [[0.5, 0.2], [0.2, -0.3]], [(0, (0, 1), 2.0)], level=5)


@pytest.fixture(scope="session")
def two_sector():
    return build_model(TWO_SECTOR)


@pytest.fixture(scope="session")
def mixed():
    return build_model(MIXED)


@pytest.fixture(scope="session")
def mixed_small():
    return build_model(MIXED.with_level(4))


@pytest.fixture(scope="session")
def tracial():
    return build_model(ModelSpec.create([2, 1], [[0.6, -0.2], [-0.2, 0.3]], level=4))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
