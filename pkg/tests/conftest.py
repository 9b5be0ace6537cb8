import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_psd(rng, n, k):
    """Random PSD matrix of rank at most k."""
    g = random_complex(rng, n, k)
    x = g @ g.conj().T
    return 0.5 * (x + x.conj().T)
