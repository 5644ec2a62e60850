import numpy as np
import pytest
from scipy import optimize, special

from umedopt.families import PoissonDistribution, PoissonFamily


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


@pytest.fixture()
def poisson():
    return PoissonFamily()


@pytest.fixture()
def poisson5():
    return PoissonDistribution(5.0)


@pytest.fixture(scope="session")
def boundary_lambda():
    """lambda* with F_lambda(0) = 0.5, i.e. ln 2, obtained by root-solving."""
    return optimize.brentq(lambda lam: special.pdtr(0, lam) - 0.5, 0.1, 2.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@pytest.fixture(autouse=True)
def _no_data_dir(monkeypatch):
    # keep tests off the disk unless a test opts in
    monkeypatch.delenv("UMEDOPT_DATA_DIR", raising=False)
    monkeypatch.delenv("UMEDOPT_WORKERS", raising=False)
