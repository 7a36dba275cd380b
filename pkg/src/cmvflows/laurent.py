"""Matrix-valued Laurent polynomials in the loop parameter h.

A :class:`LaurentMatrix` stores a finite map ``power -> p x p complex matrix``.
Besides ring arithmetic it implements the structure used by the loop-group
side of the theory: the involution ``X(h) -> X(1/conj(h))^H``, the splitting
into positive/negative/constant parts, the unitary/triangular projections and
the invariant pairing ``Im sum_j tr(X_j Y_{-j})``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

CANON_TOL = 1e-15


class LaurentMatrix:
    """Finite Laurent polynomial with p x p complex coefficients.

    Parameters
    ----------
    coeffs : mapping int -> array_like
        Coefficient matrices keyed by power of h.
    p : int, optional
        Matrix size; required when ``coeffs`` is empty.
    tol : float
        Coefficients with Frobenius norm below ``tol`` are dropped.
    """

    __slots__ = ("p", "_coeffs")
    __array_ufunc__ = None  # let numpy arrays defer to __rmatmul__

    def __init__(self, coeffs: Mapping[int, np.ndarray], p: int | None = None, tol: float = CANON_TOL):
        store = {}
        for k, c in coeffs.items():
            c = np.array(c, dtype=complex)
            if c.ndim != 2 or c.shape[0] != c.shape[1]:
                raise ValueError(f"coefficient at power {k} is not square: {c.shape}")
            if p is None:
                p = c.shape[0]
            elif c.shape[0] != p:
                raise ValueError(f"coefficient at power {k} has size {c.shape[0]}, expected {p}")
            if np.linalg.norm(c) >= tol:
                c.setflags(write=False)
                store[int(k)] = c
        if p is None:
            raise ValueError("size p is required for an empty Laurent matrix")
        self.p = int(p)
        self._coeffs = dict(sorted(store.items()))

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, p):
        return cls({}, p)

    @classmethod
    def identity(cls, p):
        return cls({0: np.eye(p)})

    @classmethod
    def constant(cls, a):
        return cls({0: a})

    @classmethod
    def scalar(cls, coeffs: Mapping[int, complex], p: int):
        """The loop c(h)·I for a scalar Laurent polynomial c."""
        return cls({k: c * np.eye(p) for k, c in coeffs.items()}, p)

    @classmethod
    def from_samples(cls, samples, tol: float = CANON_TOL, max_power: int | None = None):
        """Recover coefficients from values at the M-th roots of unity.

        ``samples[m]`` is the value at ``h = exp(2 pi i m / M)``.  Powers are
        taken in the symmetric window ``-M//2 .. (M-1)//2`` (or ``|k| <= max_power``).
        """
        samples = np.asarray(samples, dtype=complex)
        M = samples.shape[0]
        c = np.fft.fft(samples, axis=0) / M  # c[k] multiplies h^k
        coeffs = {}
        for k in range(-(M // 2), (M - 1) // 2 + 1):
            if max_power is not None and abs(k) > max_power:
                continue
            coeffs[k] = c[k % M]
        return cls(coeffs, samples.shape[1], tol=tol)

    # access -------------------------------------------------------------
    @property
    def coeffs(self):
        return dict(self._coeffs)

    def __getitem__(self, k):
        c = self._coeffs.get(int(k))
        return c if c is not None else np.zeros((self.p, self.p), complex)

    def support(self):
        return list(self._coeffs)

    def is_zero(self):
        return not self._coeffs

    def __repr__(self):
        return f"LaurentMatrix(p={self.p}, support={self.support()})"

    # evaluation ---------------------------------------------------------
    def eval(self, h):
        return evaluate(self, h)

    __call__ = eval

    def samples(self, M):
        """Values at the M-th roots of unity, shape (M, p, p)."""
        hs = np.exp(2j * np.pi * np.arange(M) / M)
        return np.stack([self.eval(h) for h in hs])

    # arithmetic ---------------------------------------------------------
    def _check(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        if other.p != self.p:
            raise ValueError(f"size mismatch: {self.p} vs {other.p}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        out = dict(self._coeffs)
        for k, c in other._coeffs.items():
            out[k] = out[k] + c if k in out else c
        return LaurentMatrix(out, self.p)

    def __neg__(self):
        return LaurentMatrix({k: -c for k, c in self._coeffs.items()}, self.p)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, s):
        if isinstance(s, LaurentMatrix):
            return NotImplemented
        return LaurentMatrix({k: s * c for k, c in self._coeffs.items()}, self.p)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, LaurentMatrix):
            return multiply(self, other)
        other = np.asarray(other)
        return LaurentMatrix({k: c @ other for k, c in self._coeffs.items()}, self.p)

    def __rmatmul__(self, other):
        other = np.asarray(other)
        return LaurentMatrix({k: other @ c for k, c in self._coeffs.items()}, self.p)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not Laurent-finite in general")
        out = LaurentMatrix.identity(self.p)
        for _ in range(n):
            out = out @ self
        return out

    def shift(self, k: int):
        """Multiply by h^k."""
        return LaurentMatrix({j + k: c for j, c in self._coeffs.items()}, self.p)

    def transpose(self):
        """Entrywise transpose of every coefficient (no conjugation)."""
        return LaurentMatrix({k: c.T for k, c in self._coeffs.items()}, self.p)

    def conjugate_by(self, J):
        return LaurentMatrix({k: J @ c @ J for k, c in self._coeffs.items()}, self.p)

    def trace(self):
        return {k: complex(np.trace(c)) for k, c in self._coeffs.items()}

    def star(self):
        return star(self)

    def max_abs_diff(self, other):
        """Largest entrywise difference over all powers."""
        keys = set(self._coeffs) | set(other._coeffs)
        if not keys:
            return 0.0
        return max(float(np.max(np.abs(self[k] - other[k]))) for k in keys)

    def allclose(self, other, atol=1e-12):
        return self.max_abs_diff(other) <= atol

    def __eq__(self, other):
        if not isinstance(other, LaurentMatrix):
            return NotImplemented
        return self.p == other.p and self.support() == other.support() and all(
            np.array_equal(self[k], other[k]) for k in self.support())

    __hash__ = None

    # serialization ------------------------------------------------------
    def to_json(self):
        return {
            "p": self.p,
            "coeffs": {str(k): [[[float(z.real), float(z.imag)] for z in row] for row in c]
                       for k, c in self._coeffs.items()},
        }

    @classmethod
    def from_json(cls, data):
        p = int(data["p"])
        coeffs = {int(k): np.array([[complex(re, im) for re, im in row] for row in rows])
                  for k, rows in data["coeffs"].items()}
        return cls(coeffs, p)


# free functions -----------------------------------------------------------

def evaluate(L: LaurentMatrix, h) -> np.ndarray:
    """Value of L at a nonzero complex h."""
    if h == 0:
        raise ValueError("Laurent matrices cannot be evaluated at h = 0")
    out = np.zeros((L.p, L.p), complex)
    for k, c in L._coeffs.items():
        out += c * complex(h) ** k
    return out


def multiply(A: LaurentMatrix, B: LaurentMatrix) -> LaurentMatrix:
    if A.p != B.p:
        raise ValueError(f"size mismatch: {A.p} vs {B.p}")
    out: dict[int, np.ndarray] = {}
    for i, a in A._coeffs.items():
        for j, b in B._coeffs.items():
            prod = a @ b
            out[i + j] = out[i + j] + prod if i + j in out else prod
    return LaurentMatrix(out, A.p)


def star(L: LaurentMatrix) -> LaurentMatrix:
    """The involution X(h) -> X(1/conj(h))^H, i.e. star(L)_j = (L_{-j})^H."""
    return LaurentMatrix({-k: c.conj().T for k, c in L._coeffs.items()}, L.p)


def project_pm0(L: LaurentMatrix):
    """Split into (strictly positive, strictly negative, constant) parts."""
    c = L._coeffs
    return (LaurentMatrix({k: v for k, v in c.items() if k > 0}, L.p),
            LaurentMatrix({k: v for k, v in c.items() if k < 0}, L.p),
            LaurentMatrix({k: v for k, v in c.items() if k == 0}, L.p))


def _split_constant(x0: np.ndarray):
    """Split a constant matrix into (anti-Hermitian part, lower-triangular real-diagonal part)."""
    lower = np.tril(x0, -1)
    upper = np.triu(x0, 1)
    d = np.diag(np.diag(x0))
    b = lower + upper.conj().T + d.real
    k = upper - upper.conj().T + 1j * d.imag
    return k, b


def project_k(L: LaurentMatrix) -> LaurentMatrix:
    """Projection onto unitary-type loops: P_- X + k(X_0) - star(P_- X)."""
    _, minus, _ = project_pm0(L)
    k0, _ = _split_constant(L[0])
    return minus + LaurentMatrix({0: k0}, L.p) - star(minus)


def project_b(L: LaurentMatrix) -> LaurentMatrix:
    """Projection onto analytic loops with triangular constant term: P_+ X + b(X_0) + star(P_- X)."""
    plus, minus, _ = project_pm0(L)
    _, b0 = _split_constant(L[0])
    return plus + LaurentMatrix({0: b0}, L.p) + star(minus)


def j_sharp(L: LaurentMatrix) -> LaurentMatrix:
    return project_k(L) - project_b(L)


def pairing(X: LaurentMatrix, Y: LaurentMatrix) -> float:
    """Im of the residue of tr(X(h) Y(h)) dh / (2 pi i h)."""
    if X.p != Y.p:
        raise ValueError(f"size mismatch: {X.p} vs {Y.p}")
    s = 0j
    for k, c in X._coeffs.items():
        d = Y._coeffs.get(-k)
        if d is not None:
            s += np.sum(c * d.T)  # tr(c @ d)
    return float(s.imag)


def _default_weight(n: int) -> float:
    return math.exp(math.sqrt(abs(n) + 1))


@dataclass(frozen=True)
class WeightFunction:
    """Symmetric, rapidly increasing weight of non-analytic type."""

    rule: Callable[[int], float] = field(default=_default_weight)

    def __call__(self, n: int) -> float:
        return float(self.rule(int(n)))

    def is_symmetric(self, ns) -> bool:
        return all(math.isclose(self(n), self(-n)) for n in ns)

    def growth_ratios(self, ns, s: float):
        """w(n) / n^s on a positive range; should be eventually increasing."""
        return np.array([self(n) / n ** s for n in ns])

    def root_gaps(self, ns):
        """|w(n)^(1/n) - 1| on a positive range; should decrease towards 0."""
        return np.array([abs(self(n) ** (1.0 / n) - 1.0) for n in ns])


def weighted_norm(X: LaurentMatrix, w: WeightFunction | None = None) -> float:
    w = w or WeightFunction()
    return float(sum(np.linalg.norm(c) * w(k) for k, c in X._coeffs.items()))
