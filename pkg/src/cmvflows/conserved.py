"""Transfer matrix, discriminant and the conserved quantities P, I_j, K_n."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import jet
from .cmv import VerblunskyVector, floquet_at

H_NODES = np.array([1, 1j, -1, -1j])
H_POWERS = (0, 1, 2, -1)  # frequencies resolved by the 4 nodes, in FFT order


def transfer_matrix(v: VerblunskyVector, z: complex) -> np.ndarray:
    """Ordered product over j = p-1..0 of [[z, -conj a_j], [-a_j z, 1]], divided by prod rho."""
    if z == 0:
        raise ValueError("transfer matrix is undefined at z = 0")
    T = np.eye(2, dtype=complex)
    for a in v.alpha[::-1]:
        T = T @ np.array([[z, -np.conj(a)], [-a * z, 1.0]])
    return T / v.P


def discriminant(v: VerblunskyVector, z: complex) -> complex:
    """z^(-p/2) tr T_p(z)."""
    return complex(np.trace(transfer_matrix(v, z)) * complex(z) ** (-(v.p // 2)))


@lru_cache(maxsize=None)
def _nodes(p: int):
    k = np.arange(p + 1)
    z = 2.0 * np.cos(np.pi * (k + 0.5) / (p + 1))
    V = np.vander(z, p + 1, increasing=True)
    F = np.array([[h ** (-k) / 4 for h in H_NODES] for k in H_POWERS])
    return z.astype(complex), np.linalg.inv(V).T, F


def char_table(alpha):
    """Coefficients of det(zI - E(h)) as a (p+1, 4) array (or jet).

    Row r holds the coefficient of z^r; columns hold h-powers in the order
    ``H_POWERS`` = (0, 1, 2, -1).  The power-2 column is an aliasing check and
    should vanish.
    """
    p = alpha.shape[0]
    z, VinvT, F = _nodes(p)
    E = floquet_at(alpha, H_NODES)
    M = z[None, :, None, None] * np.eye(p)[None, None] - E[:, None]
    D = jet.det(M)  # (4, p+1)
    C = (F @ D) @ VinvT  # (h-power, z-power)
    return jet.swapaxes(C, 0, 1)


@dataclass(frozen=True)
class CharPoly:
    """det(zI - E(h)) = sum_{r, k} coeffs[(r, k)] z^r h^k."""

    table: np.ndarray  # (p+1, 3), columns h^-1, h^0, h^1
    alias: float  # size of the (unresolved) h^{+-2} coefficient

    @property
    def p(self):
        return self.table.shape[0] - 1

    def as_dict(self, tol=0.0):
        return {(r, k - 1): complex(self.table[r, k]) for r in range(self.p + 1)
                for k in range(3) if abs(self.table[r, k]) > tol}

    def __call__(self, z, h):
        zp = complex(z) ** np.arange(self.p + 1)
        return complex(zp @ self.table @ np.array([1 / h, 1, h]))

    def E_r(self, r):
        """Coefficient of z^(p-r) as a Laurent scalar {h-power: value}."""
        row = self.table[self.p - r]
        return {-1: complex(row[0]), 0: complex(row[1]), 1: complex(row[2])}


def char_poly(v: VerblunskyVector) -> CharPoly:
    t = char_table(v.alpha)
    table = np.stack([t[:, 3], t[:, 0], t[:, 1]], axis=1)
    return CharPoly(table, float(np.max(np.abs(t[:, 2]))))


def i_values(alpha):
    """(I_{-p/2}, ..., I_{p/2}): the h^0 row of the characteristic polynomial."""
    return char_table(alpha)[:, 0]


def p_value(alpha):
    return jet.prod(jet.sqrt(1.0 - alpha * jet.conj(alpha)))


def k_value(alpha, n: int):
    """K_n = (1/n) * (h^0 coefficient of tr E(h)^n)."""
    p = alpha.shape[0]
    if not 1 <= n <= p // 2:
        raise ValueError(f"K_n needs 1 <= n <= {p // 2}, got {n}")
    m = p + 2
    hs = np.exp(2j * np.pi * np.arange(m) / m)
    E = floquet_at(alpha, hs)
    En = E
    for _ in range(n - 1):
        En = En @ E
    return jet.total(jet.trace(En)) * (1.0 / (m * n))


@dataclass(frozen=True, eq=False)
class ConservedSet:
    P: float
    I: np.ndarray  # indexed j = -p/2 .. p/2
    K: np.ndarray  # indexed n = 1 .. p/2

    @property
    def p(self):
        return self.I.size - 1

    def I_at(self, j):
        return complex(self.I[j + self.p // 2])

    def K_at(self, n):
        return complex(self.K[n - 1])

    def drift(self, other: "ConservedSet"):
        """Largest deviations (P, max_j |I_j|, max_n |K_n|) from another set."""
        return (abs(self.P - other.P), float(np.max(np.abs(self.I - other.I))),
                float(np.max(np.abs(self.K - other.K))))

    def to_json(self):
        pair = lambda z: [float(z.real), float(z.imag)]
        return {"P": float(self.P), "I": [pair(z) for z in self.I], "K": [pair(z) for z in self.K]}

    @classmethod
    def from_json(cls, data):
        return cls(float(data["P"]), np.array([complex(*x) for x in data["I"]]),
                   np.array([complex(*x) for x in data["K"]]))


def invariants(v: VerblunskyVector) -> ConservedSet:
    I = np.asarray(i_values(v.alpha))
    K = np.array([k_value(v.alpha, n) for n in range(1, v.p // 2 + 1)])
    return ConservedSet(v.P, I, K)
