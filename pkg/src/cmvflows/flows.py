"""Three routes for the commuting flows, plus the loop-group dressing action.

* ``integrate_ode``: RK4 on the bracket vector field of a Hamiltonian.
* ``lax_rhs``: the Lax-form velocity [E(h), k-projection of (i) E(h)^n].
* ``flow_by_factorization``: exponentiate the central gradient, split the
  resulting positive loop by matrix spectral factorization and conjugate the
  factors of E(h).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cmv import VerblunskyVector, build_factors, recognize_floquet
from .conserved import ConservedSet, char_poly, invariants
from .laurent import LaurentMatrix, project_k, star
from .poisson import (Observable, I_observable, K_observable, P_observable,
                      al_hamiltonian, hamiltonian_field, log_P)

KINDS = ("ReK", "ImK", "ReI", "ImI", "logP", "P", "AL")
BOUNDARY_MARGIN = 1e-6
MAX_FACTOR_STEP = 0.25


class FactorizationError(RuntimeError):
    """A numerical stage failed; ``stage`` names it and ``residual`` is the achieved value."""

    def __init__(self, stage, message, residual=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.residual = residual


class BoundaryApproachError(RuntimeError):
    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class HamiltonianSpec:
    """kind in KINDS; n indexes K_n (1..p/2) or I_n (0..p/2-1)."""

    kind: str
    n: int = 0

    def validate(self, p: int):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind in ("ReK", "ImK") and not 1 <= self.n <= p // 2:
            raise ValueError(f"{self.kind} needs 1 <= n <= {p // 2}, got {self.n}")
        if self.kind in ("ReI", "ImI") and not 0 <= self.n <= p // 2 - 1:
            raise ValueError(f"{self.kind} needs 0 <= n <= {p // 2 - 1}, got {self.n}")
        return self

    def observable(self, p: int) -> Observable:
        self.validate(p)
        if self.kind in ("ReK", "ImK"):
            return K_observable(self.n, p, self.kind[:2].lower())
        if self.kind in ("ReI", "ImI"):
            return I_observable(self.n, p, self.kind[:2].lower())
        if self.kind == "logP":
            return log_P(p)
        if self.kind == "P":
            return P_observable(p)
        return al_hamiltonian(p)


# ODE route -----------------------------------------------------------------

@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    drift: np.ndarray  # rows (P, max_j |dI_j|, max_n |dK_n|) relative to t = 0
    spec: HamiltonianSpec | None = None

    @property
    def final(self) -> VerblunskyVector:
        return self.states[-1]

    def alphas(self) -> np.ndarray:
        return np.array([s.alpha for s in self.states])

    def max_drift(self):
        return self.drift.max(axis=0) if len(self.drift) else np.zeros(3)

    def csv_header(self):
        p = self.states[0].p
        cols = ["t"]
        for j in range(p):
            cols += [f"re_a{j}", f"im_a{j}"]
        return cols + ["P_drift", "maxI_drift"]

    def write_csv(self, path, fmt=".17g"):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.csv_header())
            for t, s, d in zip(self.times, self.states, self.drift):
                row = [format(t, fmt)]
                for a in s.alpha:
                    row += [format(a.real, fmt), format(a.imag, fmt)]
                row += [format(d[0], fmt), format(d[1], fmt)]
                w.writerow(row)


def vector_field(spec: HamiltonianSpec, p: int):
    H = spec.observable(p)
    return lambda a: hamiltonian_field(H, VerblunskyVector(a))


def integrate_ode(v0: VerblunskyVector, spec: HamiltonianSpec, t_end: float, dt: float,
                  record_every: int = 1) -> Trajectory:
    """Fixed-step classical RK4 on alpha' = {H, alpha}."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    spec.validate(v0.p)
    f = vector_field(spec, v0.p)
    steps = int(round(abs(t_end) / dt))
    h = math.copysign(abs(t_end) / steps, t_end) if steps else 0.0
    c0 = invariants(v0)
    times, states, drift = [0.0], [v0], [np.zeros(3)]
    a = v0.alpha.copy()

    def check(x, t):
        if np.max(np.abs(x)) >= 1 - BOUNDARY_MARGIN:
            traj = Trajectory(np.array(times), states, np.array(drift), spec)
            raise BoundaryApproachError(f"state reached |alpha| >= 1 - {BOUNDARY_MARGIN} at t={t:g}", traj)
        return x

    for i in range(1, steps + 1):
        k1 = f(a)
        k2 = f(check(a + 0.5 * h * k1, i * h))
        k3 = f(check(a + 0.5 * h * k2, i * h))
        k4 = f(check(a + h * k3, i * h))
        a = check(a + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), i * h)
        if i % record_every == 0 or i == steps:
            s = VerblunskyVector(a)
            times.append(i * h)
            states.append(s)
            drift.append(np.array(invariants(s).drift(c0)))
    return Trajectory(np.array(times), states, np.array(drift), spec)


def p_flow_exact(v0: VerblunskyVector, t: float) -> VerblunskyVector:
    """Flow generated by P: every coefficient rotates by exp(i t P)."""
    return VerblunskyVector(v0.alpha * np.exp(1j * t * v0.P))


# Lax route -----------------------------------------------------------------

def _lax_check(v, spec):
    if spec.kind not in ("ReK", "ImK"):
        raise ValueError("the Lax form is available for ReK and ImK")
    spec.validate(v.p)


def lax_rhs(v: VerblunskyVector, spec: HamiltonianSpec) -> LaurentMatrix:
    """[E(h), project_k((i) E(h)^n)] with the factor i for ReK."""
    _lax_check(v, spec)
    E = build_factors(v).assembled
    X = E ** spec.n
    if spec.kind == "ReK":
        X = 1j * X
    K = project_k(X)
    return E @ K - K @ E


def lax_rhs_via_q(v: VerblunskyVector, spec: HamiltonianSpec) -> LaurentMatrix:
    """Same velocity written with Q_n(h) = A_0/2 on the diagonal + strict upper A_0 + A_{-1}/h."""
    _lax_check(v, spec)
    E = build_factors(v).assembled
    En = E ** spec.n
    A0 = En[0]
    Q = LaurentMatrix({0: 0.5 * np.diag(np.diag(A0)) + np.triu(A0, 1), -1: En[-1]}, v.p)
    M = 1j * (Q + star(Q)) if spec.kind == "ReK" else Q - star(Q)
    return E @ M - M @ E


# central gradients -----------------------------------------------------------

def _grad_index(spec: HamiltonianSpec, p: int) -> int:
    """j with Hamiltonian built from E_j: I_n corresponds to j = p/2 - n."""
    return p // 2 - spec.n if spec.kind in ("ReI", "ImI") else p // 2


def nabla_E_laurent(E: LaurentMatrix, cp, j: int) -> LaurentMatrix:
    """-sum_{i<j} E_{j-1-i}(h) E(h)^i, the transposed gradient of E_j at E(h)."""
    p = E.p
    out = LaurentMatrix.zero(p)
    Ei = LaurentMatrix.identity(p)
    for i in range(j):
        out = out - LaurentMatrix.scalar(cp.E_r(j - 1 - i), p) @ Ei
        Ei = Ei @ E
    return out


def nabla_E_matrix(x: np.ndarray, j: int) -> np.ndarray:
    """Pointwise version for a numeric matrix x, using its own characteristic coefficients."""
    e = np.poly(x)  # det(zI - x) = sum_r e[r] z^(p-r)
    out = np.zeros_like(x, dtype=complex)
    xi = np.eye(x.shape[0], dtype=complex)
    for i in range(j):
        out -= e[j - 1 - i] * xi
        xi = xi @ x
    return out


def central_gradient_matrix(x: np.ndarray, spec: HamiltonianSpec) -> np.ndarray:
    """D phi(x) for the ReI / ImI central functions at a numeric matrix x."""
    p = x.shape[0]
    j = _grad_index(spec, p)
    g = x @ nabla_E_matrix(x, j)
    return 1j * g if spec.kind == "ReI" else g


def grad_central(v: VerblunskyVector, spec: HamiltonianSpec) -> LaurentMatrix:
    """Left gradient D phi(E(h)) of the central function behind the Hamiltonian."""
    if spec.kind not in ("ReI", "ImI", "P", "logP"):
        raise ValueError(f"no central gradient for kind {spec.kind!r}")
    spec.validate(v.p)
    E = build_factors(v).assembled
    cp = char_poly(v)
    j = _grad_index(spec, v.p)
    G = E @ nabla_E_laurent(E, cp, j)
    if spec.kind == "ReI":
        return 1j * G
    if spec.kind == "ImI":
        return G
    G = (-1j * G).shift(1)
    return G if spec.kind == "P" else (1.0 / v.P) * G


def gradient_recursion_residual(v: VerblunskyVector, j: int, hs=(1.0, 1j, 0.6 + 0.3j)) -> float:
    """max over h of |x nabla E_j(x) - E_j(x) I - nabla E_{j+1}(x)| at x = E(h)."""
    E = build_factors(v).assembled
    cp = char_poly(v)
    a = nabla_E_laurent(E, cp, j)
    b = nabla_E_laurent(E, cp, j + 1)
    Ej = LaurentMatrix.scalar(cp.E_r(j), v.p)
    R = E @ a - Ej - b
    return max(float(np.max(np.abs(R(h)))) for h in hs)


# spectral factorization ------------------------------------------------------

def _roots_of_unity(M):
    return np.exp(2j * np.pi * np.arange(M) / M)


def _bauer_row(Phi: LaurentMatrix, N: int):
    p = Phi.p
    blocks = {k: Phi[k] for k in range(-(N - 1), N)}
    T = np.empty((N * p, N * p), complex)
    for i in range(N):
        for j in range(N):
            T[i * p:(i + 1) * p, j * p:(j + 1) * p] = blocks[i - j]
    T = 0.5 * (T + T.conj().T)
    try:
        L = np.linalg.cholesky(T)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("spectral", f"block Toeplitz matrix not positive definite at N={N}") from exc
    last = L[(N - 1) * p:, :]
    return [last[:, (N - 1 - k) * p:(N - k) * p] for k in range(N)]


def factorization_residual(Phi: LaurentMatrix, b: LaurentMatrix, M: int) -> float:
    hs = _roots_of_unity(M)
    return max(float(np.linalg.norm(Phi(h) - b(h) @ b(h).conj().T)) for h in hs)


def spectral_factorize(Phi: LaurentMatrix, N: int = 64, tol: float = 1e-10,
                       N_start: int = 8) -> LaurentMatrix:
    """Write a positive loop as b star(b), b analytic with b(0) lower triangular, positive diagonal.

    Bauer's method: the last block row of the Cholesky factor of the N-block
    Toeplitz matrix of Phi tends to (B_{N-1}, ..., B_0).  N is doubled from
    ``N_start`` until the coefficients settle, up to the cap ``N``.
    """
    p = Phi.p
    if not star(Phi).allclose(Phi, 1e-12 * max(1.0, _scale(Phi))):
        raise FactorizationError("spectral", "loop is not self-adjoint")
    deg = max((abs(k) for k in Phi.support()), default=0)
    M = max(2 * N, 4 * deg + 4)
    mins = [np.linalg.eigvalsh(0.5 * (S + S.conj().T))[0] for S in Phi.samples(M)]
    if min(mins) < 1e-12:
        raise FactorizationError("spectral", f"loop is not positive definite (min eigenvalue {min(mins):.3g})")
    if deg == 0:
        return LaurentMatrix({0: np.linalg.cholesky(Phi[0])}, p)
    n = max(2, min(N_start, N))
    prev = _bauer_row(Phi, n)
    change = np.inf
    while n < N:
        n = min(2 * n, N)
        cur = _bauer_row(Phi, n)
        change = max(float(np.max(np.abs(cur[k] - prev[k]))) for k in range(len(prev)))
        change = max(change, max((float(np.max(np.abs(c))) for c in cur[len(prev):]), default=0.0))
        prev = cur
        if change < 0.1 * tol:
            break
    b = LaurentMatrix(dict(enumerate(prev)), p)
    res = factorization_residual(Phi, b, 2 * n)
    if res >= tol:
        raise FactorizationError("spectral", f"residual {res:.3g} >= {tol:.3g} with N={n}", res)
    return b


def _scale(L: LaurentMatrix) -> float:
    return max((float(np.max(np.abs(c))) for c in L.coeffs.values()), default=0.0)


def _reversal(p):
    return np.eye(p)[::-1]


def iwasawa_factorize(g: LaurentMatrix, N: int = 64, tol: float = 1e-10, M: int | None = None):
    """Split g = k b with k unitary on the circle and b analytic, b(0) lower triangular positive.

    b solves star(b) b = star(g) g; it is obtained from the spectral factor of
    the transposed, order-reversed loop.  k is recovered from samples.
    """
    p = g.p
    J = _reversal(p)
    Phi = star(g) @ g
    c = spectral_factorize(Phi.transpose().conjugate_by(J), N, tol)
    b = c.conjugate_by(J).transpose()
    M = M or max(4 * N, 64)
    hs = _roots_of_unity(M)
    gs = np.stack([g(h) for h in hs])
    bs = np.stack([b(h) for h in hs])
    ks = np.linalg.solve(bs.transpose(0, 2, 1), gs.transpose(0, 2, 1)).transpose(0, 2, 1)
    k = LaurentMatrix.from_samples(ks, tol=1e-15)
    res = max(float(np.max(np.abs(k(h) @ b(h) - g(h)))) for h in hs[::max(1, M // (2 * N))])
    unit = max(float(np.max(np.abs(K @ K.conj().T - np.eye(p)))) for K in ks)
    if res >= tol or unit >= tol:
        raise FactorizationError("iwasawa", f"residual {res:.3g}, unitarity {unit:.3g}", max(res, unit))
    return k, b


# dressing action ------------------------------------------------------------

@dataclass(frozen=True)
class Dressed:
    loop: LaurentMatrix
    line_gap: float  # max |k(g)^-1 x k(y) - b(g) x b(y)^-1| on the circle


def dressing_action(g: LaurentMatrix, x: LaurentMatrix, N: int = 64, tol: float = 1e-10,
                    M: int = 64) -> Dressed:
    """k(g)^-1 x k(x^-1 g x), compared with b(g) x b(x^-1 g x)^-1.

    With g = k b the factor b here is the inverse of the analytic factor in the
    convention g = k(g) b(g)^-1, so both lines describe the same loop.
    """
    kg, bg = iwasawa_factorize(g, N, tol)
    y = star(x) @ g @ x
    ky, by = iwasawa_factorize(y, N, tol)
    hs = _roots_of_unity(M)
    line1 = np.stack([np.linalg.solve(kg(h), x(h) @ ky(h)) for h in hs])
    line2 = np.stack([bg(h) @ x(h) @ np.linalg.inv(by(h)) for h in hs])
    gap = float(np.max(np.abs(line1 - line2)))
    return Dressed(LaurentMatrix.from_samples(line1, tol=1e-14), gap)


# factorization route --------------------------------------------------------

# Time orientation linking the factorization of exp(-t(...)) to the bracket flow
# of the same Hamiltonian.  Fixed by comparing velocities with hamiltonian_field;
# see tests/test_flows.py::test_factorization_sign.
FACTOR_TIME_SIGN = {"ReI": 1.0, "ImI": 1.0}


def _ql(M: np.ndarray):
    """M = u L with u unitary and L lower triangular with positive diagonal."""
    J = _reversal(M.shape[0])
    q, r = np.linalg.qr(M @ J)
    ph = np.diag(r) / np.abs(np.diag(r))
    q = q * ph
    r = ph.conj()[:, None] * r
    return q @ J, J @ r @ J


@dataclass
class FactorizationStep:
    alpha: VerblunskyVector
    spectral_residual: float
    h_gap: float
    recognition_residual: float


def _factor_step(v: VerblunskyVector, spec: HamiltonianSpec, t: float, N: int, tol: float,
                 M: int) -> FactorizationStep:
    F = build_factors(v)
    p = v.p
    hs = _roots_of_unity(M)
    X = grad_central(v, spec)
    sign = 1.0 if spec.kind == "ImI" else -1.0
    tt = FACTOR_TIME_SIGN[spec.kind] * t
    Phis = np.empty((M, p, p), complex)
    herm = 0.0
    for m, h in enumerate(hs):
        E = F.E(h)
        S = X(h) + sign * central_gradient_matrix(E.conj().T, spec)
        herm = max(herm, float(np.max(np.abs(S - S.conj().T))))
        w, V = np.linalg.eigh(0.5 * (S + S.conj().T))
        Phis[m] = (V * np.exp(-tt * w)) @ V.conj().T
    if herm > 1e-9:
        raise FactorizationError("exponent", f"exponent is not Hermitian on the circle ({herm:.3g})", herm)
    Phi = LaurentMatrix.from_samples(Phis, tol=1e-16)
    Phi = 0.5 * (Phi + star(Phi))
    try:
        b1 = spectral_factorize(Phi, N, tol)
    except FactorizationError as exc:
        raise FactorizationError("spectral", str(exc), exc.residual) from exc
    sres = factorization_residual(Phi, b1, 2 * N)
    u, _ = _ql(np.linalg.solve(b1[0], F.ge))
    b2 = F.ge.conj().T @ b1 @ u
    ge_t = np.linalg.solve(b1(1.0), F.ge @ b2(1.0))
    ge_i = np.linalg.solve(b1(1j), F.ge @ b2(1j))
    h_gap = float(np.max(np.abs(ge_t - ge_i)))
    go_s = np.stack([np.linalg.solve(b2(h), F.go(h) @ b1(h)) for h in hs])
    go_t = LaurentMatrix.from_samples(go_s, tol=1e-15)
    E_t = ge_t @ go_t
    w = recognize_floquet(E_t, tol=1e-7)
    if w is None:
        raise FactorizationError("recognize", "evolved loop is not of Floquet CMV shape")
    rec = build_factors(w).assembled.max_abs_diff(E_t)
    return FactorizationStep(w, sres, h_gap, rec)


def flow_by_factorization(v0: VerblunskyVector, spec: HamiltonianSpec, t: float, N: int = 64,
                          tol: float = 1e-10, M: int = 64, details: bool = False):
    """Evolve by loop-group factorization; splits |t| into pieces of at most 0.25."""
    if spec.kind not in ("ReI", "ImI"):
        raise ValueError("the factorization route is implemented for ReI and ImI")
    spec.validate(v0.p)
    if t == 0:
        return (v0, []) if details else v0
    pieces = max(1, math.ceil(abs(t) / MAX_FACTOR_STEP - 1e-12))
    v = v0
    log = []
    for _ in range(pieces):
        step = _factor_step(v, spec, t / pieces, N, tol, M)
        log.append(step)
        v = step.alpha
    return (v, log) if details else v
