import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from powerdecay import (
    Perturbation,
    SystemSpec,
    decompose_symmetric,
    norm_power,
)

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def seeded_y0(seed, n=3, radius=0.1):
    u = np.random.default_rng(seed).standard_normal(n)
    return radius * u / np.linalg.norm(u)


@pytest.fixture(scope="session")
def diag125():
    A = decompose_symmetric(np.diag([1.0, 2.0, 5.0]))
    return SystemSpec(A, norm_power(3, 2), Perturbation.zero(2)).with_bounds()


@pytest.fixture(scope="session")
def diag125_perturbed():
    A = decompose_symmetric(np.diag([1.0, 2.0, 5.0]))
    return SystemSpec(A, norm_power(3, 2), Perturbation.power(2, 0.1, 1)).with_bounds()


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))
                           if s.startswith("criterion") else 0):
            terminalreporter.write_line(line)
