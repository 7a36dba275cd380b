import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmvflows import (LaurentMatrix, VerblunskyVector, build_factors, coxeter_element,
                      recognize_floquet)
from cmvflows.cmv import floquet_at, floquet_power, theta_block
from cmvflows.laurent import star
from cmvflows.rng import SplitMix64

from conftest import verblunsky


@pytest.mark.parametrize("a,want", [
    (0, [[0, 1], [1, 0]]),
    (0.6, [[0.6, 0.8], [0.8, -0.6]]),
    (0.3j, [[-0.3j, np.sqrt(0.91)], [np.sqrt(0.91), -0.3j]]),
])
def test_theta(a, want):
    assert np.allclose(theta_block(a), want, atol=1e-15)


@given(st.floats(0, 0.99), st.floats(0, 2 * np.pi))
def test_theta_unitary_involution(r, t):
    T = theta_block(r * np.exp(1j * t))
    assert np.allclose(T @ T.conj().T, np.eye(2))
    assert np.linalg.det(T) == pytest.approx(-1)


@pytest.mark.parametrize("alpha", [[0.1, 1.0], [0.2, 0.1, 0.3], []])
def test_rejects_bad_vectors(alpha):
    with pytest.raises(ValueError):
        VerblunskyVector(np.array(alpha, complex))


def test_free_case():
    L = build_factors(VerblunskyVector.zeros(2)).assembled
    assert L.max_abs_diff(LaurentMatrix({-1: np.diag([1, 0]), 1: np.diag([0, 1])})) == 0


def test_hand_product(v2):
    a0, a1 = v2.alpha
    r0, r1 = v2.rho
    F = build_factors(v2)
    for h in (1.0, 1j, 0.4 - 2j):
        want = [[-np.conj(a0) * a1 + r0 * r1 / h, np.conj(a0) * r1 * h + r0 * np.conj(a1)],
                [-r0 * a1 - a0 * r1 / h, r0 * r1 * h - a0 * np.conj(a1)]]
        assert np.allclose(F.E(h), want, atol=1e-15)


def test_zero_coefficients_give_coxeter():
    F, C = build_factors(VerblunskyVector.zeros(4)), coxeter_element(4)
    for t in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        assert np.allclose(F.E(np.exp(1j * t)), C.E(np.exp(1j * t)))


def test_coxeter_p2():
    C = coxeter_element(2)
    assert np.allclose(C.ge, [[0, 1], [1, 0]])
    assert C.go.max_abs_diff(LaurentMatrix({1: [[0, 1], [0, 0]], -1: [[0, 0], [1, 0]]})) == 0


def test_coxeter_p4_pattern():
    go = coxeter_element(4).go
    assert go[1][0, 3] == 1 and go[-1][3, 0] == 1
    assert np.allclose(go[0][1:3, 1:3], [[0, 1], [1, 0]])


@pytest.mark.parametrize("p", [2, 4, 6, 8])
def test_coxeter_unitary(p):
    L = coxeter_element(p).assembled
    assert (L @ star(L)).max_abs_diff(LaurentMatrix.identity(p)) == 0


def test_coxeter_odd_raises():
    with pytest.raises(ValueError):
        coxeter_element(3)


@given(verblunsky(sizes=(2, 4, 6, 8)))
def test_loop_unitary(v):
    L = build_factors(v).assembled
    assert (L @ star(L)).max_abs_diff(LaurentMatrix.identity(v.p)) < 1e-13


@given(verblunsky(sizes=(2, 4, 6, 8)))
def test_recognize_round_trip(v):
    w = recognize_floquet(build_factors(v).assembled)
    assert w is not None and w.distance(v) < 1e-10


def test_recognize_rejects_identity():
    assert recognize_floquet(LaurentMatrix.identity(4)) is None


def test_recognize_rejects_higher_powers(v2):
    L = build_factors(v2).assembled
    assert recognize_floquet(L + LaurentMatrix({2: 1e-3 * np.eye(2)})) is None


@given(verblunsky())
def test_batched_eval(v):
    hs = np.exp(1j * np.linspace(0, 6, 5))
    batch = floquet_at(v.alpha, hs)
    F = build_factors(v)
    assert all(np.allclose(batch[i], F.E(h)) for i, h in enumerate(hs))


def test_power_free_pattern():
    A0, A1, Am1 = floquet_power(VerblunskyVector.zeros(4), 1)
    # g^e swaps rows 0,1 so the single h-entry of g^o at (0, 3) lands in row 1
    assert np.count_nonzero(A1) == 1 and A1[1, 3] == 1
    assert np.count_nonzero(Am1) == 1 and Am1[2, 0] == 1


@pytest.mark.parametrize("n", [1, 2])
def test_power_triangular(n):
    v = VerblunskyVector.random(SplitMix64(n), 6, rmax=0.5)
    A0, A1, Am1 = floquet_power(v, n)
    assert np.max(np.abs(np.tril(A1))) < 1e-14
    assert np.max(np.abs(np.triu(Am1))) < 1e-14


@given(verblunsky(sizes=(4, 6)))
def test_half_power_trace(v):
    A0, A1, Am1 = floquet_power(v, v.p // 2)
    h = 0.3 + 1.1j
    E = build_factors(v).E(h)
    lhs = np.trace(np.linalg.matrix_power(E, v.p // 2)) - np.trace(A0)
    assert lhs == pytest.approx(v.p / 2 * (h + 1 / h) * v.P, abs=1e-12)


@given(verblunsky())
def test_json_round_trip(v):
    w = VerblunskyVector.from_json(v.to_json())
    assert np.array_equal(w.alpha, v.alpha)


def test_periodic_index(v2):
    assert v2[2] == v2[0] and v2[-1] == v2[1]
