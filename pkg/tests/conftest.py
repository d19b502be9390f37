import numpy as np
import pytest

from ptyabc.projections import ProbeObjectPair
from ptyabc.simulate import GroundTruth, ScanGeometry, forward, make_phantom, make_probe, make_scan


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_problem():
    """A 3x3 scan of a 16 px probe over a 48 px phantom, noiseless."""
    m, n = 16, 48
    obj = make_phantom(48, 0.4, 1.0, 4, seed=3)
    probe = make_probe(m, 6, 2)
    geom = make_scan(3, 3, 8, 1, m, n, seed=3)
    truth = GroundTruth(obj, probe)
    return truth, geom, forward(truth, geom)


@pytest.fixture
def random_instance(rng):
    """Random probe, object and waves with M=8, N=16, J=4."""
    m, n = 8, 16
    geom = ScanGeometry(rng.integers(0, n - m + 1, size=(4, 2)), m, n)
    pair = ProbeObjectPair(crandn(rng, m, m), crandn(rng, n, n))
    x = crandn(rng, 4, m, m)
    return x, geom, pair
