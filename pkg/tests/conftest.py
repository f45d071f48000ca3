import numpy as np
import pytest

from tsfn.rng import make_rng


def random_symmetric(n, seed):
    a = make_rng(seed).standard_normal((n, n))
    return 0.5 * (a + a.T)


@pytest.fixture
def sym():
    return random_symmetric
