import numpy as np
import pytest


@pytest.fixture
def rng_factory():
    from dpboot.rng import RngStream

    def make(seed=0, stream_id=0):
        return RngStream(seed, stream_id)

    return make


def binomial_se(p, n):
    return np.sqrt(max(p * (1.0 - p), 1e-12) / n)
