import numpy as np
import pytest

from subknap import backend
from subknap.generators import generate
from subknap.multilinear import FractionalPoint
from subknap.objectives import Instance, WeightedCoverage


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile jitted kernels once so timed sections measure computation only
    backend.warmup()


@pytest.fixture
def tiny_coverage():
    """Two elements a={1,2}, b={2,3}, unit universe weights: f({a,b}) = 3."""
    cov = WeightedCoverage(
        np.ones(3), (np.array([0, 1], dtype=np.int64), np.array([1, 2], dtype=np.int64))
    )
    return Instance(2, np.array([0.5, 0.5]), cov)


def random_instance(family, n, seed, **kw):
    return generate(family, n, seed, **kw)


def random_point(rng, n, support, integral_frac=0.2):
    """A random sparse point over elements [0, n)."""
    ids = rng.choice(n, size=min(n, support + 2), replace=False)
    integral = [int(e) for e in ids[: max(0, int(len(ids) * integral_frac))]]
    frac_ids = [int(e) for e in ids[len(integral) : len(integral) + support]]
    vals = {e: float(rng.uniform(0.05, 0.95)) for e in frac_ids}
    return FractionalPoint.make(vals, integral)
