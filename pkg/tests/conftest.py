import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from cmvflows import LaurentMatrix, VerblunskyVector

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def disk_points(draw, rmax=0.6, rmin=0.0):
    r = draw(st.floats(rmin, rmax))
    t = draw(st.floats(0, 2 * np.pi))
    return r * np.exp(1j * t)


@st.composite
def verblunsky(draw, sizes=(2, 4, 6), rmax=0.6, rmin=0.0):
    p = draw(st.sampled_from(sizes))
    return VerblunskyVector(np.array([draw(disk_points(rmax, rmin)) for _ in range(p)]))


@st.composite
def laurent(draw, p=3, lo=-2, hi=2):
    powers = draw(st.sets(st.integers(lo, hi), min_size=1, max_size=4))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return LaurentMatrix({k: rng.normal(size=(p, p)) + 1j * rng.normal(size=(p, p)) for k in powers})


@pytest.fixture
def rng():
    from cmvflows.rng import SplitMix64
    return SplitMix64(2024)


@pytest.fixture
def v2():
    return VerblunskyVector(np.array([0.5, 0.3j]))
