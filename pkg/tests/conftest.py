import numpy as np
import pytest

from nonclassical.fock import FockOperator


def random_state(rng, dims, rank=None):
    n = int(np.prod(dims))
    rank = rank or n
    a = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = a @ a.conj().T
    return FockOperator(tuple(dims), rho / np.trace(rho))


def random_hermitian(rng, dims):
    n = int(np.prod(dims))
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return FockOperator(tuple(dims), x + x.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
