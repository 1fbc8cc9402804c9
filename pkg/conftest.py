"""
Shared fixtures for the test suites
"""
import numpy as np
import pytest

from src.initial_data.generators import make_fixture
from src.period.period_analysis import PeriodAnalyzer
from src.potential.radial_potential import RadialPotential


class HarmonicPotential(RadialPotential):
    """k (r - 1)^2 / 2: isochronous, H vanishes identically"""

    def __init__(self, k: float = 4.0):
        self.k = k
        self.d = 3

    def __repr__(self) -> str:
        return f"HarmonicPotential(k={self.k})"

    def _raw(self, z):
        return 0.5 * self.k * (z - 1.0) ** 2

    def _raw_d1(self, r):
        return self.k * (r - 1.0)

    def _raw_d2(self, r):
        return self.k * np.ones_like(r)

    @property
    def r_star(self) -> float:
        return 1.0


@pytest.fixture
def harmonic():
    return HarmonicPotential(4.0)


@pytest.fixture(scope="session")
def analyzer():
    return PeriodAnalyzer()


@pytest.fixture(scope="session")
def precise_analyzer():
    return PeriodAnalyzer({'quad_rtol': 1e-12, 'derivative_rtol': 1e-12})


@pytest.fixture(scope="session")
def compliant_d3():
    return make_fixture('compliant', 3, n_nodes=128)


@pytest.fixture(scope="session")
def stationary_d3():
    return make_fixture('stationary', 3, n_nodes=128)


@pytest.fixture(scope="session")
def perturbed_d3():
    return make_fixture('perturbed', 3, n_nodes=128)


@pytest.fixture(scope="session")
def blowup_d3():
    return make_fixture('blowup', 3, n_nodes=128)
