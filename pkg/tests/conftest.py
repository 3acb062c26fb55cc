import numpy as np
import pytest

from qsdbound.ensemble import DensityMatrix, make_ensemble

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


def rand_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def rand_hermitian(rng, d):
    g = rand_complex(rng, d, d)
    return g + g.conj().T


def rand_psd(rng, d, rank=None):
    g = rand_complex(rng, d, rank or d)
    return g @ g.conj().T


def rand_density(rng, d):
    m = rand_psd(rng, d)
    return m / np.trace(m).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def zero_plus():
    """{|0>, |+>} with equal priors."""
    return make_ensemble([(0.5, DensityMatrix.pure(KET0)), (0.5, DensityMatrix.pure(KET_PLUS))])


@pytest.fixture
def orthogonal_pair():
    return make_ensemble([(0.5, DensityMatrix.pure(KET0)), (0.5, DensityMatrix.pure(KET1))])
