import csv

import numpy as np
import pytest
from hypothesis import given

from cmvflows import LaurentMatrix, VerblunskyVector, build_factors, coxeter_element, recognize_floquet
from cmvflows.checks import planted_analytic_loop
from cmvflows.flows import (BoundaryApproachError, FactorizationError, HamiltonianSpec, Trajectory,
                            central_gradient_matrix, dressing_action, factorization_residual,
                            flow_by_factorization, grad_central, gradient_recursion_residual,
                            integrate_ode, iwasawa_factorize, lax_rhs, lax_rhs_via_q, nabla_E_matrix,
                            p_flow_exact, spectral_factorize)
from cmvflows.laurent import star
from cmvflows.poisson import hamiltonian_field
from cmvflows.rng import SplitMix64

from conftest import verblunsky


def rand(seed, p, rmax=0.6):
    return VerblunskyVector.random(SplitMix64(seed), p, rmax)


# specs and gradients ----------------------------------------------------------

@pytest.mark.parametrize("kind,n", [("ReK", 0), ("ImK", 3), ("ReI", 2), ("ImI", -1), ("Foo", 0)])
def test_spec_validation(kind, n):
    with pytest.raises(ValueError):
        HamiltonianSpec(kind, n).validate(4)


def test_first_gradient_is_minus_identity():
    x = build_factors(rand(1, 4)).E(0.3 + 0.9j)
    assert np.allclose(nabla_E_matrix(x, 1), -np.eye(4))


def test_free_gradient():
    v = VerblunskyVector.zeros(2)
    E = build_factors(v).assembled
    assert grad_central(v, HamiltonianSpec("ImI", 0)).max_abs_diff(-E) < 1e-15
    assert grad_central(v, HamiltonianSpec("ReI", 0)).max_abs_diff(-1j * E) < 1e-15


@pytest.mark.parametrize("j", [1, 2])
def test_gradient_recursion(j):
    assert gradient_recursion_residual(rand(j, 4), j) < 1e-10


@given(verblunsky(sizes=(4, 6)))
def test_gradient_samples_agree(v):
    spec = HamiltonianSpec("ImI", 1)
    X = grad_central(v, spec)
    h = np.exp(0.7j)
    assert np.allclose(X(h), central_gradient_matrix(build_factors(v).E(h), spec), atol=1e-12)


# Lax form -------------------------------------------------------------------------

@pytest.mark.parametrize("kind,n", [("ReK", 1), ("ImK", 1), ("ReK", 2), ("ImK", 2)])
def test_lax_vanishes_at_coxeter(kind, n):
    assert lax_rhs(VerblunskyVector.zeros(4), HamiltonianSpec(kind, n)).is_zero()


@pytest.mark.parametrize("kind,n", [("ReK", 1), ("ImK", 1), ("ReK", 2), ("ImK", 2), ("ReK", 3)])
def test_lax_two_forms_agree(kind, n):
    v = rand(n, 6)
    assert lax_rhs(v, HamiltonianSpec(kind, n)).max_abs_diff(lax_rhs_via_q(v, HamiltonianSpec(kind, n))) < 1e-13


@pytest.mark.parametrize("kind", ["ReK", "ImK"])
def test_lax_matches_finite_difference(kind):
    v, dt = rand(5, 4), 1e-6
    spec = HamiltonianSpec(kind, 1)
    fwd = integrate_ode(v, spec, dt, dt).final
    bwd = integrate_ode(v, spec, -dt, dt).final
    L = lax_rhs(v, spec)
    for h in (1.0, 1j):
        fd = (build_factors(fwd).E(h) - build_factors(bwd).E(h)) / (2 * dt)
        assert np.max(np.abs(fd - L(h))) < 1e-5


def test_lax_unavailable_for_i():
    with pytest.raises(ValueError):
        lax_rhs(rand(0, 4), HamiltonianSpec("ReI", 0))


# ODE route --------------------------------------------------------------------------

def test_rejects_nonpositive_step(v2):
    with pytest.raises(ValueError):
        integrate_ode(v2, HamiltonianSpec("P"), 1.0, 0.0)


def test_p_flow_closed_form():
    v = rand(8, 4)
    end = integrate_ode(v, HamiltonianSpec("P"), 1.0, 1e-3).final
    assert end.distance(p_flow_exact(v, 1.0)) < 1e-10


def test_log_p_flow_rotates_at_unit_speed():
    v = rand(9, 4)
    end = integrate_ode(v, HamiltonianSpec("logP"), 1.0, 1e-3).final
    assert np.allclose(end.alpha, v.alpha * np.exp(1j), atol=1e-10)


def test_p_flow_examples(v2):
    assert np.array_equal(p_flow_exact(v2, 0.0).alpha, v2.alpha)
    assert np.array_equal(p_flow_exact(VerblunskyVector.zeros(4), 2.0).alpha, np.zeros(4))
    assert np.allclose(p_flow_exact(v2, np.pi / v2.P).alpha, -v2.alpha, atol=1e-15)


def test_conservation_re_k1():
    v = rand(6, 4)
    traj = integrate_ode(v, HamiltonianSpec("ReK", 1), 1.0, 1e-3, record_every=100)
    assert traj.max_drift()[0] < 1e-8 and traj.max_drift()[1] < 1e-8
    e0 = np.sort_complex(np.linalg.eigvals(build_factors(v).E(1.0)))
    e1 = np.sort_complex(np.linalg.eigvals(build_factors(traj.final).E(1.0)))
    assert np.max(np.abs(e0 - e1)) < 1e-7


def test_gauge_identity():
    v = rand(3, 4)
    a = integrate_ode(v, HamiltonianSpec("ReK", 1), 0.5, 1e-3).final.alpha * np.exp(-1j)
    b = integrate_ode(v, HamiltonianSpec("AL"), 0.5, 1e-3).final.alpha
    assert np.max(np.abs(a - b)) < 1e-10


def test_boundary_approach():
    v = VerblunskyVector(np.array([0.99, -0.99, 0.99, -0.99]))
    with pytest.raises(BoundaryApproachError) as err:
        integrate_ode(v, HamiltonianSpec("AL"), 50.0, 0.5)
    assert isinstance(err.value.trajectory, Trajectory)


def test_csv(tmp_path, v2):
    traj = integrate_ode(v2, HamiltonianSpec("logP"), 0.01, 1e-3)
    path = tmp_path / "t.csv"
    traj.write_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "re_a0", "im_a0", "re_a1", "im_a1", "P_drift", "maxI_drift"]
    assert len(rows) == 12
    assert complex(float(rows[-1][1]), float(rows[-1][2])) == traj.final.alpha[0]


# factorizations ---------------------------------------------------------------------

def test_spectral_identity():
    assert spectral_factorize(LaurentMatrix.identity(3)).max_abs_diff(LaurentMatrix.identity(3)) == 0


def test_spectral_constant():
    b = spectral_factorize(LaurentMatrix({0: np.diag([4.0, 1.0])}))
    assert b.max_abs_diff(LaurentMatrix({0: np.diag([2.0, 1.0])})) < 1e-15


@pytest.mark.parametrize("seed", range(6))
def test_spectral_plant_and_recover(seed):
    c = planted_analytic_loop(SplitMix64(seed), 2 + 2 * (seed % 3))
    b = spectral_factorize(c @ star(c))
    assert b.max_abs_diff(c) < 1e-8
    assert factorization_residual(c @ star(c), b, 64) < 1e-10


def test_spectral_rejects_non_selfadjoint():
    with pytest.raises(FactorizationError):
        spectral_factorize(LaurentMatrix({0: np.eye(2), 1: np.eye(2)}))


def test_spectral_rejects_indefinite():
    Phi = LaurentMatrix({0: np.eye(2), 1: np.eye(2), -1: np.eye(2)})  # 1 + 2 cos t vanishes
    with pytest.raises(FactorizationError):
        spectral_factorize(Phi)


def test_iwasawa_unitary_loop():
    g = build_factors(rand(2, 4)).assembled
    k, b = iwasawa_factorize(g)
    assert k.max_abs_diff(g) < 1e-12 and b.max_abs_diff(LaurentMatrix.identity(4)) < 1e-12


def test_iwasawa_constant():
    A = SplitMix64(4).complex_normal((3, 3)) + 2 * np.eye(3)
    k, b = iwasawa_factorize(LaurentMatrix({0: A}))
    K, B = k[0], b[0]
    assert np.allclose(K @ K.conj().T, np.eye(3)) and np.allclose(K @ B, A)
    assert np.allclose(np.triu(B, 1), 0) and np.all(np.diag(B).real > 0)
    assert k.support() == [0] and b.support() == [0]


@pytest.mark.parametrize("seed", range(4))
def test_iwasawa_plant_and_recover(seed):
    rng = SplitMix64(100 + seed)
    c = planted_analytic_loop(rng, 4)
    u = build_factors(VerblunskyVector.random(rng, 4)).assembled
    k, b = iwasawa_factorize(u @ c)
    assert b.max_abs_diff(c) < 1e-8 and k.max_abs_diff(u) < 1e-8


# dressing ----------------------------------------------------------------------------

def test_dressing_by_identity():
    x = coxeter_element(4).assembled
    d = dressing_action(LaurentMatrix.identity(4), x)
    assert d.loop.max_abs_diff(x) < 1e-13


def test_dressing_by_unitary_loop():
    g = build_factors(rand(11, 4)).assembled
    d = dressing_action(g, build_factors(rand(12, 4)).assembled)
    assert d.line_gap < 1e-10


@pytest.mark.parametrize("p,seed", [(2, 0), (4, 1), (4, 2), (6, 3)])
def test_dressing_orbit(p, seed):
    g = planted_analytic_loop(SplitMix64(seed), p, lower=False)
    d = dressing_action(g, coxeter_element(p).assembled)
    assert d.line_gap < 1e-8
    w = recognize_floquet(d.loop, 1e-7)
    assert w is not None
    assert build_factors(w).assembled.max_abs_diff(d.loop) < 1e-7


# factorization route -------------------------------------------------------------------

def test_factor_flow_zero_time(v2):
    assert flow_by_factorization(v2, HamiltonianSpec("ImI", 0), 0.0) is v2


@pytest.mark.parametrize("p,kind,n,t", [(2, "ImI", 0, 0.1), (2, "ReI", 0, 0.1),
                                        (4, "ReI", 1, 0.05), (4, "ImI", 1, 0.05)])
def test_factor_flow_matches_ode(p, kind, n, t):
    v, spec = rand(20 + p + n, p), HamiltonianSpec(kind, n)
    w, log = flow_by_factorization(v, spec, t, details=True)
    ode = integrate_ode(v, spec, t, 1e-4).final
    assert np.max(np.abs(w.alpha - ode.alpha)) < 1e-6
    assert max(s.spectral_residual for s in log) < 1e-8
    assert max(s.h_gap for s in log) < 1e-7


def test_factor_flow_long_time_splits():
    v, spec = rand(31, 4), HamiltonianSpec("ReI", 1)
    w, log = flow_by_factorization(v, spec, 0.6, details=True)
    assert len(log) == 3
    assert w.distance(integrate_ode(v, spec, 0.6, 1e-3).final) < 1e-8


@pytest.mark.parametrize("kind", ["ReI", "ImI"])
def test_factorization_sign(kind):
    # velocity of the factorization route equals the bracket field, and not its negative
    v, spec, dt = rand(40, 4), HamiltonianSpec(kind, 1), 1e-4
    fwd = flow_by_factorization(v, spec, dt).alpha
    bwd = flow_by_factorization(v, spec, -dt).alpha
    vel = (fwd - bwd) / (2 * dt)
    field = hamiltonian_field(spec.observable(4), v)
    assert np.max(np.abs(field)) > 1e-2
    assert np.max(np.abs(vel - field)) < 1e-6
    assert np.max(np.abs(vel + field)) > 1e-2


def test_factor_flow_kinds():
    with pytest.raises(ValueError):
        flow_by_factorization(rand(0, 4), HamiltonianSpec("ReK", 1), 0.1)
