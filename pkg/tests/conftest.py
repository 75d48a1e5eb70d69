import numpy as np
import pytest

from hillspps import HillDiscriminant, free_problem, mathieu


@pytest.fixture(scope="session")
def free():
    return HillDiscriminant().fit(free_problem())


@pytest.fixture(scope="session")
def r1():
    return HillDiscriminant().fit(mathieu(1))


@pytest.fixture(scope="session")
def r5():
    return HillDiscriminant().fit(mathieu(5))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def free_discriminant(lam, period=np.pi):
    """``2 cos(sqrt(lambda) T)``, continued analytically to ``lambda < 0``."""
    lam = np.asarray(lam, dtype=complex)
    return (2 * np.cos(np.sqrt(lam) * period)).real
