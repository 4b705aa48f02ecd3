import numpy as np
import pytest

from l0screen import Instance


@pytest.fixture
def tiny():
    """2x2 identity instance used throughout the worked examples."""
    return Instance(np.eye(2), np.array([3.0, 0.1]))


def random_instance(seed, m, n, scale=1.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n)) * scale
    y = rng.standard_normal(m)
    return Instance(a, y)
