"""Verblunsky data, theta blocks and Floquet CMV loops E(h) = g^e g^o(h)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jet
from .laurent import LaurentMatrix
from .rng import SplitMix64


@dataclass(frozen=True, eq=False)
class VerblunskyVector:
    """p complex numbers in the open unit disk, p even, indexed periodically."""

    alpha: np.ndarray

    def __post_init__(self):
        a = np.array(self.alpha, dtype=complex).reshape(-1)
        if a.size < 2 or a.size % 2:
            raise ValueError(f"p must be even and positive, got {a.size}")
        if not np.all(np.abs(a) < 1):
            raise ValueError("Verblunsky coefficients must lie in the open unit disk")
        a.setflags(write=False)
        object.__setattr__(self, "alpha", a)

    @property
    def p(self) -> int:
        return self.alpha.size

    @property
    def rho(self) -> np.ndarray:
        return np.sqrt(1.0 - np.abs(self.alpha) ** 2)

    @property
    def P(self) -> float:
        return float(np.prod(self.rho))

    def __getitem__(self, j):
        return self.alpha[j % self.p]

    def __eq__(self, other):
        return isinstance(other, VerblunskyVector) and np.array_equal(self.alpha, other.alpha)

    __hash__ = None

    def __repr__(self):
        return f"VerblunskyVector({np.array2string(self.alpha, precision=4)})"

    def distance(self, other) -> float:
        return float(np.max(np.abs(self.alpha - other.alpha)))

    @classmethod
    def zeros(cls, p):
        return cls(np.zeros(p, complex))

    @classmethod
    def random(cls, rng: SplitMix64, p: int, rmax: float = 0.6, rmin: float = 0.0):
        return cls(rng.disk(p, rmax, rmin))

    def to_json(self):
        return {"p": self.p, "alpha": [[float(a.real), float(a.imag)] for a in self.alpha]}

    @classmethod
    def from_json(cls, data):
        alpha = [complex(re, im) for re, im in data["alpha"]]
        if "p" in data and int(data["p"]) != len(alpha):
            raise ValueError(f"p = {data['p']} but {len(alpha)} coefficients given")
        return cls(np.array(alpha))


def theta_block(a: complex) -> np.ndarray:
    """[[conj(a), rho], [rho, -a]] with rho = sqrt(1 - |a|^2)."""
    if abs(a) >= 1:
        raise ValueError(f"|a| must be < 1, got {abs(a)}")
    r = np.sqrt(1.0 - abs(a) ** 2)
    return np.array([[np.conj(a), r], [r, -a]], dtype=complex)


def factor_arrays(alpha):
    """Dense pieces (g^e, go_{-1}, go_0, go_{+1}) for a 1-d array or jet alpha.

    g^o(h) = go_{-1}/h + go_0 + h go_{+1}.  Works on plain arrays and on jets,
    which is how derivatives of spectral quantities are obtained.
    """
    p = alpha.shape[0]
    abar = jet.conj(alpha)
    rho = jet.sqrt(1.0 - alpha * abar)
    ge = jet.zeros_like_kind(alpha, (p, p))
    gm = jet.zeros_like_kind(alpha, (p, p))
    g0 = jet.zeros_like_kind(alpha, (p, p))
    gp = jet.zeros_like_kind(alpha, (p, p))
    for k in range(0, p, 2):
        ge[k, k] = abar[k]
        ge[k, k + 1] = rho[k]
        ge[k + 1, k] = rho[k]
        ge[k + 1, k + 1] = -alpha[k]
    for k in range(1, p - 2, 2):
        g0[k, k] = abar[k]
        g0[k, k + 1] = rho[k]
        g0[k + 1, k] = rho[k]
        g0[k + 1, k + 1] = -alpha[k]
    g0[0, 0] = -alpha[p - 1]
    g0[p - 1, p - 1] = abar[p - 1]
    gp[0, p - 1] = rho[p - 1]
    gm[p - 1, 0] = rho[p - 1]
    return ge, gm, g0, gp


def floquet_at(alpha, hs):
    """E(h) for each h in ``hs``; shape (len(hs), p, p).  Accepts jets."""
    hs = np.asarray(hs, dtype=complex).reshape(-1)
    ge, gm, g0, gp = factor_arrays(alpha)
    go = g0[None] + hs[:, None, None] * gp[None] + (1.0 / hs)[:, None, None] * gm[None]
    return ge[None] @ go


@dataclass(frozen=True, eq=False)
class FloquetCMV:
    alpha: VerblunskyVector
    ge: np.ndarray
    go: LaurentMatrix
    assembled: LaurentMatrix

    @property
    def p(self):
        return self.alpha.p

    def E(self, h):
        return self.assembled.eval(h)


def build_factors(v: VerblunskyVector) -> FloquetCMV:
    ge, gm, g0, gp = factor_arrays(v.alpha)
    go = LaurentMatrix({-1: gm, 0: g0, 1: gp}, v.p)
    return FloquetCMV(v, ge, go, ge @ go)


def coxeter_element(p: int) -> FloquetCMV:
    """The Floquet CMV loop with all coefficients zero."""
    if p < 2 or p % 2:
        raise ValueError(f"p must be even and >= 2, got {p}")
    return build_factors(VerblunskyVector.zeros(p))


def _entry(L: LaurentMatrix, power: int, i: int, j: int) -> complex:
    return complex(L[power][i, j])


def recognize_floquet(L: LaurentMatrix, tol: float = 1e-10):
    """Return the VerblunskyVector v with L = E(h; v), or None.

    Each alpha_j is read from the ratio of two entries of E(h) whose quotient
    is -alpha_j / rho_j; the candidate is then rebuilt and compared.
    """
    p = L.p
    if p < 2 or p % 2:
        return None
    ratios = np.empty(p, complex)
    for k in range(p // 2):
        # even index 2k: E[2k+1, 2k+2] / E[2k, 2k+2] = -alpha_2k / rho_2k
        c = (2 * k + 2) % p
        pw = -1 if 2 * k + 2 >= p else 0
        num, den = _entry(L, pw, 2 * k + 1, c), _entry(L, pw, 2 * k, c)
        if abs(den) < 1e-14:
            return None
        ratios[2 * k] = -num / den
        # odd index 2k-1: E[2k+1, 2k] / E[2k+1, 2k-1] = -alpha_{2k-1} / rho_{2k-1}
        c = (2 * k - 1) % p
        pw = 1 if 2 * k - 1 < 0 else 0
        num, den = _entry(L, 0, 2 * k + 1, 2 * k), _entry(L, pw, 2 * k + 1, c)
        if abs(den) < 1e-14:
            return None
        ratios[(2 * k - 1) % p] = -num / den
    alpha = ratios / np.sqrt(1.0 + np.abs(ratios) ** 2)
    try:
        v = VerblunskyVector(alpha)
    except ValueError:
        return None
    if build_factors(v).assembled.max_abs_diff(L) > tol:
        return None
    return v


def floquet_power(v: VerblunskyVector, n: int):
    """Coefficients (A_0, A_1, A_{-1}) of E(h)^n for 1 <= n <= p/2."""
    if not 1 <= n <= v.p // 2:
        raise ValueError(f"n must lie in 1..{v.p // 2}, got {n}")
    En = build_factors(v).assembled ** n
    extra = [k for k in En.support() if abs(k) > 1]
    if extra:
        raise RuntimeError(f"unexpected powers {extra} in E^{n}")
    return En[0], En[1], En[-1]
