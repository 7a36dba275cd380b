import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmvflows.rng import SplitMix64


def test_reference_stream():
    # first outputs of splitmix64 from state 0
    g = SplitMix64(0)
    assert g.next_u64() == 0xE220A8397B1DCDAF
    assert g.next_u64() == 0x6E789E6AA1B965F4


@given(st.integers(0, 2**64 - 1))
def test_uniform_range(seed):
    x = SplitMix64(seed).uniforms(50)
    assert np.all((0 <= x) & (x < 1))


@pytest.mark.parametrize("rmax,rmin", [(0.6, 0.0), (0.6, 0.1), (0.3, 0.2)])
def test_disk_radius(rmax, rmin):
    z = SplitMix64(5).disk(200, rmax, rmin)
    assert np.all(np.abs(z) <= rmax) and np.all(np.abs(z) >= rmin)


def test_reproducible():
    assert np.array_equal(SplitMix64(9).complex_normal((3, 3)), SplitMix64(9).complex_normal((3, 3)))
