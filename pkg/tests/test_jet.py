import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmvflows import jet
from cmvflows.jet import Jet

from conftest import disk_points


def grad(f, x):
    """Real-coordinate derivatives of f at x by forward mode."""
    out = f(Jet.seed(np.asarray(x, complex)))
    return out.derivative()


def central(f, x, eps=1e-6):
    x = np.asarray(x, complex)
    dx, dy = [], []
    for j in range(x.size):
        e = np.zeros(x.size, complex)
        e[j] = eps
        dx.append((f(x + e) - f(x - e)) / (2 * eps))
        dy.append((f(x + 1j * e) - f(x - 1j * e)) / (2 * eps))
    return np.array(dx), np.array(dy)


FUNCS = {
    "poly": lambda a: jet.total(a * a * jet.conj(a)),
    "log": lambda a: jet.total(jet.log(1 - a * jet.conj(a))),
    "sqrt": lambda a: jet.prod(jet.sqrt(1 - a * jet.conj(a))),
    "ratio": lambda a: a[0] / (2 + a[1]),
    "real": lambda a: jet.real(a[0] * a[1]) + jet.imag(a[1]),
}


@pytest.mark.parametrize("name", sorted(FUNCS))
def test_matches_central_differences(name):
    x = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    dx, dy = grad(FUNCS[name], x)
    cx, cy = central(FUNCS[name], x)
    assert np.allclose(dx, cx, atol=1e-9) and np.allclose(dy, cy, atol=1e-9)


@given(disk_points(0.9), disk_points(0.9))
def test_det_and_trace(a, b):
    def f(x):
        M = jet.zeros_like_kind(x, (2, 2))
        M[0, 0] = x[0]
        M[0, 1] = x[1]
        M[1, 0] = jet.conj(x[1])
        M[1, 1] = 1 + x[0] * x[1]
        return jet.det(M) + jet.trace(M @ M)
    dx, dy = grad(f, [a, b])
    cx, cy = central(f, [a, b])
    assert np.allclose(dx, cx, atol=1e-8) and np.allclose(dy, cy, atol=1e-8)


def test_wirtinger_of_holomorphic_coordinate():
    dx, dy = grad(lambda a: a[0], [0.2j, 0.1])
    assert np.allclose((dx + 1j * dy) / 2, 0)
    assert np.allclose((dx - 1j * dy) / 2, [1, 0])


def test_numpy_does_not_swallow_jets():
    x = Jet.seed(np.array([0.1, 0.2j]))
    out = np.eye(2) @ (x * np.ones((2, 2)))
    assert isinstance(out, Jet)


def test_plain_arrays_pass_through():
    a = np.array([0.5, 0.25])
    assert np.allclose(jet.sqrt(a), np.sqrt(a))
    assert not jet.is_jet(jet.conj(a))
