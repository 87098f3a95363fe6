"""
Shared fixtures for the liftkit test suite.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add project to path
sys.path.insert(0, str(Path(__file__).parent))

# Reference material, not part of the suite
collect_ignore_glob = ["examples/*"]


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale acceptance runs")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _hermitian(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = 0.5 * (z + z.conj().T)
    return h / np.linalg.norm(h, 2)


@pytest.fixture
def random_unitary(rng):
    return lambda n: _unitary(rng, n)


@pytest.fixture
def random_hermitian(rng):
    """Hermitian matrices of operator norm 1."""
    return lambda n: _hermitian(rng, n)


@pytest.fixture
def random_projection(rng):
    def make(n, rank):
        w = _unitary(rng, n)[:, :rank]
        return w @ w.conj().T
    return make


def clock_shift_pair(n):
    omega = np.exp(2j * np.pi / n)
    u = np.diag(omega ** np.arange(n)).astype(np.complex128)
    v = np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)
    return u, v


@pytest.fixture
def clock_shift():
    return clock_shift_pair
