import numpy as np
import pytest
from hypothesis import given, strategies as st

from cmvflows import ConservedSet, VerblunskyVector, build_factors, invariants
from cmvflows.conserved import char_poly, discriminant, i_values, k_value, transfer_matrix

from conftest import disk_points, verblunsky


def test_transfer_free():
    z = 1.7 - 0.2j
    assert np.allclose(transfer_matrix(VerblunskyVector.zeros(2), z), [[z * z, 0], [0, 1]])


def test_transfer_hand_product(v2):
    a0, a1 = v2.alpha
    f0 = np.array([[1, -np.conj(a0)], [-a0, 1]])
    f1 = np.array([[1, -np.conj(a1)], [-a1, 1]])
    assert np.allclose(transfer_matrix(v2, 1.0), f1 @ f0 / np.prod(v2.rho))


def test_transfer_zero_raises(v2):
    with pytest.raises(ValueError):
        transfer_matrix(v2, 0)


@given(verblunsky(sizes=(2, 4, 6, 8)), disk_points(2.0, 0.3))
def test_transfer_determinant(v, z):
    assert np.linalg.det(transfer_matrix(v, z)) == pytest.approx(z ** v.p, rel=1e-10)


@pytest.mark.parametrize("p", [2, 4])
def test_discriminant_free(p):
    z = 0.4 + 1.3j
    assert discriminant(VerblunskyVector.zeros(p), z) == pytest.approx(z ** (p // 2) + z ** (-(p // 2)))


@given(verblunsky(sizes=(2, 4, 6, 8)), st.floats(0, 2 * np.pi))
def test_discriminant_real_on_circle(v, t):
    assert abs(discriminant(v, np.exp(1j * t)).imag) < 1e-12


def test_char_poly_free():
    cp = char_poly(VerblunskyVector.zeros(2))
    z, h = 0.7 + 0.1j, 1.5j
    assert cp(z, h) == pytest.approx(z * z - (h + 1 / h) * z + 1, abs=1e-14)


@given(verblunsky(sizes=(2, 4, 6, 8)), disk_points(2.0, 0.5), disk_points(2.0, 0.5))
def test_char_poly_identity(v, z, h):
    det = np.linalg.det(z * np.eye(v.p) - build_factors(v).E(h))
    rhs = v.P * z ** (v.p // 2) * (discriminant(v, z) - h - 1 / h)
    assert abs(det - rhs) < 1e-10 * max(1, abs(det))
    assert abs(char_poly(v)(z, h) - det) < 1e-10 * max(1, abs(det))


@given(verblunsky(sizes=(2, 4, 6, 8)))
def test_h_terms_only_in_middle(v):
    # the z^{p/2} coefficient carries the only h^{+-1} dependence, -P
    d = char_poly(v).as_dict()
    for (r, k), c in d.items():
        want = -v.P if (r == v.p // 2 and k != 0) else None
        if want is not None:
            assert c == pytest.approx(want, abs=1e-12)
        elif k != 0:
            assert abs(c) < 1e-12


def test_invariants_free_p2():
    c = invariants(VerblunskyVector.zeros(2))
    assert c.P == 1
    assert np.allclose(c.I, [1, 0, 1], atol=1e-14) and np.allclose(c.K, [0], atol=1e-14)


def test_invariants_free_p4():
    c = invariants(VerblunskyVector.zeros(4))
    assert np.allclose(c.I, [1, 0, 0, 0, 1], atol=1e-14) and np.allclose(c.K, [0, 0], atol=1e-14)


def test_p2_hand_expansion(v2):
    # det E = 1 and tr E = -2 Re(conj(a0) a1) + P (h + 1/h), so I = (1, 2 Re(conj(a0) a1), 1)
    a0, a1 = v2.alpha
    I = invariants(v2).I
    assert np.allclose(I, [1, 2 * np.real(np.conj(a0) * a1), 1], atol=1e-14)
    assert I[0] == pytest.approx(np.conj(I[2]))


@given(verblunsky(sizes=(2, 4, 6, 8)))
def test_i_symmetry_and_p(v):
    c = invariants(v)
    assert np.allclose(c.I[::-1], np.conj(c.I), atol=1e-12)
    assert c.P == pytest.approx(np.prod(np.sqrt(1 - np.abs(v.alpha) ** 2)))


@given(verblunsky(sizes=(2, 4, 6)))
def test_k_from_powers(v):
    L = build_factors(v).assembled
    for n in range(1, v.p // 2 + 1):
        want = np.trace((L ** n)[0]) / n
        assert k_value(v.alpha, n) == pytest.approx(want, abs=1e-12)


def test_k_range(v2):
    with pytest.raises(ValueError):
        k_value(v2.alpha, 2)


@given(verblunsky(sizes=(2, 4, 6)), st.floats(0, 2 * np.pi))
def test_rotation_invariance(v, t):
    # all coefficients rotated by one phase is a unitary conjugation of E(h)
    a = invariants(v)
    b = invariants(VerblunskyVector(v.alpha * np.exp(1j * t)))
    assert max(b.drift(a)) < 1e-12


@given(verblunsky(sizes=(2, 4)))
def test_json_round_trip(v):
    c = invariants(v)
    d = ConservedSet.from_json(c.to_json())
    assert max(d.drift(c)) == 0
