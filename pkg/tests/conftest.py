import numpy as np
import pytest

from nullplane.families import random_polys
from nullplane.tensor import MetricSpec


def sample_box(seed, n=10):
    return np.random.default_rng(seed).uniform(0.5, 1.5, (n, 4))


def random_walker_specs(seed, count, degree=2):
    out = []
    for i in range(count):
        a, b, c = random_polys(seed + i, degree, ("u", "v", "x", "y"), 3)
        out.append(MetricSpec.walker(a, b, c))
    return out


@pytest.fixture(scope="session")
def walker_corpus():
    """Ten random walker metrics with a shared point batch."""
    return random_walker_specs(7000, 10), sample_box(7100)
