import numpy as np
import pytest

FIG2_P = [0.84, 0.10, 0.06]
FIG2_Q = [0.79, 0.19, 0.02]


def random_probs(rng, d, concentration=None):
    a = rng.uniform(0.3, 3.0) if concentration is None else concentration
    return rng.dirichlet(np.full(d, a))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
