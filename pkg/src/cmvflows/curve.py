"""Spectral-curve data of the periodic problem.

The recurrence solutions phi_j(z), psi_j(z) are Laurent polynomials in z and
are stored exactly as such.  From them we get the monodromy matrix, the
Dirichlet divisor, the normalized Bloch eigenvector and its behaviour at the
four points above z = 0 and z = infinity.

Arithmetic is written against Python number protocols, so the same code runs
on complex floats or on ``mpmath.mpc`` values; the asymptotic checks use the
latter because the Bloch vector on the + sheet is a difference of terms many
orders of magnitude larger than the result.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .cmv import VerblunskyVector, build_factors
from .conserved import char_poly


class NonGenericError(ValueError):
    """Input violates a genericity assumption (distinct branch points / nonzero coefficients)."""


class BranchProximityError(ValueError):
    pass


class DirichletProximityError(ValueError):
    pass


class LaurentScalar:
    """Finite Laurent polynomial in z; coefficients may be complex or mpc."""

    __slots__ = ("coeffs", "tol")

    def __init__(self, coeffs=None, tol=1e-15):
        self.tol = tol
        self.coeffs = {int(k): c for k, c in (coeffs or {}).items() if abs(c) > tol}

    @classmethod
    def const(cls, c, tol=1e-15):
        return cls({0: c}, tol)

    def _new(self, coeffs):
        return LaurentScalar(coeffs, self.tol)

    def __add__(self, other):
        if not isinstance(other, LaurentScalar):
            other = self._new({0: other})
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentScalar):
            out = {}
            for i, a in self.coeffs.items():
                for j, b in other.coeffs.items():
                    out[i + j] = out.get(i + j, 0) + a * b
            return self._new(out)
        return self._new({k: c * other for k, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self._new({k: v / c for k, v in self.coeffs.items()})

    def shift(self, k):
        """Multiply by z^k (exact in the Laurent ring)."""
        return self._new({j + k: c for j, c in self.coeffs.items()})

    def __call__(self, z):
        return sum((c * z ** k for k, c in self.coeffs.items()), 0)

    def support(self):
        return sorted(self.coeffs)

    def degree(self):
        return max(self.coeffs) if self.coeffs else None

    def low_degree(self):
        return min(self.coeffs) if self.coeffs else None

    def leading(self):
        return self.coeffs[self.degree()]

    def trailing(self):
        return self.coeffs[self.low_degree()]

    def __getitem__(self, k):
        return self.coeffs.get(k, 0)

    def max_abs_diff(self, other):
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def polynomial(self):
        """Coefficients (highest first) of z^(-low) * self, and the shift low."""
        lo, hi = self.low_degree(), self.degree()
        return np.array([complex(self[k]) for k in range(hi, lo - 1, -1)]), lo

    def __repr__(self):
        return "LaurentScalar(" + ", ".join(f"z^{k}: {complex(c):.6g}" for k, c in sorted(self.coeffs.items())) + ")"


# recurrences ------------------------------------------------------------------

def _coefficients(v: VerblunskyVector, exact: bool):
    if exact:
        a = [mpmath.mpc(complex(x)) for x in v.alpha]
        r = [mpmath.sqrt(1 - abs(x) ** 2) for x in a]
        return a, r, mpmath.mpf("1e-45")
    return [complex(x) for x in v.alpha], [float(x) for x in v.rho], 1e-15


def _step(a, r, p, n, prev, cur):
    """Given u_{n-1}, u_n return u_{n+1} from the solved three-term recurrence."""
    if n % 2 == 0:  # u_{2j+1} = (rho_{2j-1} u_{2j-1} - alpha_{2j-1} u_{2j} - z alpha_{2j} u_{2j}) / (z rho_{2j})
        am, ae = a[(n - 1) % p], a[n % p]
        num = prev * r[(n - 1) % p] - cur * am - cur.shift(1) * ae
        return num.shift(-1) / r[n % p]
    # n = 2j+1: u_{2j+2} = (z rho_{2j} u_{2j} - (z conj(alpha_{2j}) + conj(alpha_{2j+1})) u_{2j+1}) / rho_{2j+1}
    ae, ao = a[(n - 1) % p], a[n % p]
    num = prev.shift(1) * r[(n - 1) % p] - cur.shift(1) * ae.conjugate() - cur * ao.conjugate()
    return num / r[n % p]


def _solve(v, start, first, second, n_max, exact=False):
    """Solution u with u_{start-1} = first, u_start = second, up to index n_max."""
    a, r, tol = _coefficients(v, exact)
    u = {start - 1: LaurentScalar.const(first, tol), start: LaurentScalar.const(second, tol)}
    for n in range(start, n_max):
        u[n + 1] = _step(a, r, v.p, n, u[n - 1], u[n])
    return u


def bloch_basis(v: VerblunskyVector, n_max: int, exact: bool = False):
    """phi, psi as dicts n -> LaurentScalar for n = -1..n_max."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    one, zero = (mpmath.mpc(1), mpmath.mpc(0)) if exact else (1.0 + 0j, 0j)
    return _solve(v, 0, one, zero, n_max, exact), _solve(v, 0, zero, one, n_max, exact)


def shifted_basis(v: VerblunskyVector, j: int, n_max: int | None = None, exact: bool = False):
    """psi^[j]: the solution of the index-shifted recurrence with u_{-1} = 0, u_0 = 1.

    Returned as a dict k -> LaurentScalar for k = -1..n_max (default p).
    """
    if not 0 <= j < v.p:
        raise ValueError(f"shift must lie in 0..{v.p - 1}")
    n_max = v.p if n_max is None else n_max
    one, zero = (mpmath.mpc(1), mpmath.mpc(0)) if exact else (1.0 + 0j, 0j)
    w = _solve(v, j, zero, one, n_max + j, exact)
    return {k: w[k + j] for k in range(-1, n_max + 1)}


def wronskian(phi, psi, v: VerblunskyVector, j: int, z):
    """W_j = rho_j (phi_j psi_{j+1} - phi_{j+1} psi_j) at z."""
    return v.rho[j % v.p] * (phi[j](z) * psi[j + 1](z) - phi[j + 1](z) * psi[j](z))


def casoratian(phi, psi, j: int) -> LaurentScalar:
    """B_{j+1} = phi_j psi_{j+1} - psi_j phi_{j+1}."""
    return phi[j] * psi[j + 1] - psi[j] * phi[j + 1]


def monodromy(v: VerblunskyVector, z, basis=None) -> np.ndarray:
    if z == 0:
        raise ValueError("monodromy is undefined at z = 0")
    phi, psi = basis or bloch_basis(v, v.p)
    p = v.p
    return np.array([[phi[p - 1](z), psi[p - 1](z)], [phi[p](z), psi[p](z)]], dtype=complex)


# curve data ---------------------------------------------------------------------

def _companion_roots(coeffs_high_first):
    c = np.asarray(coeffs_high_first, dtype=complex)
    if abs(c[0]) < 1e-14:
        raise ValueError(f"leading coefficient {abs(c[0]):.3g} is numerically zero")
    n = c.size - 1
    if n == 0:
        return np.array([], complex)
    C = np.zeros((n, n), complex)
    C[0, :] = -c[1:] / c[0]
    C[np.arange(1, n), np.arange(n - 1)] = 1.0
    # geev balances the matrix before the QR iteration
    return scipy.linalg.eigvals(C, overwrite_a=True, check_finite=False)


def discriminant_polynomial(v: VerblunskyVector) -> np.ndarray:
    """P z^{p/2} Delta(z) = sum_j I_j z^{j+p/2}, ascending coefficients."""
    return char_poly(v).table[:, 1]


def branch_points(v: VerblunskyVector):
    """Roots of (sum_j I_j z^{j+p/2})^2 - 4 P^2 z^p and a genericity flag."""
    q = discriminant_polynomial(v)
    poly = np.convolve(q, q)
    poly[v.p] -= 4 * v.P ** 2
    roots = _companion_roots(poly[::-1])
    d = np.abs(roots[:, None] - roots[None, :]) + np.diag(np.full(roots.size, np.inf))
    return roots, bool(d.min() > 1e-6)


def check_nonzero(v: VerblunskyVector, thresh: float = 1e-8):
    small = np.flatnonzero(np.abs(v.alpha) <= thresh)
    if small.size:
        raise NonGenericError(f"coefficients {small.tolist()} vanish; the Dirichlet data need alpha_j != 0")


def match_distance(a, b) -> float:
    """Max distance under the optimal pairing of two equal-size multisets."""
    a, b = np.asarray(a), np.asarray(b)
    if a.size != b.size:
        return math.inf
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    i, j = linear_sum_assignment(cost)
    return float(cost[i, j].max())


def dirichlet_pencil_eigenvalues(v: VerblunskyVector) -> np.ndarray:
    """Eigenvalues of det(z ge^H - go) after removing the last row and column."""
    F = build_factors(v)
    p = v.p
    A = F.go[0][: p - 1, : p - 1]
    B = F.ge.conj().T[: p - 1, : p - 1]
    return scipy.linalg.eigvals(A, B)


@dataclass
class SpectralCurveData:
    branch: np.ndarray
    dirichlet_z: np.ndarray
    divisor: list
    generic: bool
    cross_check: float = 0.0

    @property
    def genus(self):
        return self.dirichlet_z.size

    def to_json(self):
        pair = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"branch": [pair(z) for z in self.branch],
                "dirichlet": [pair(z) for z in self.dirichlet_z],
                "divisor": [[pair(h), pair(z)] for h, z in self.divisor],
                "genus": int(self.genus), "generic": bool(self.generic)}


def dirichlet_data(v: VerblunskyVector, cross_tol: float = 1e-7) -> SpectralCurveData:
    check_nonzero(v)
    p = v.p
    phi, psi = bloch_basis(v, p)
    coeffs, _ = psi[p - 1].polynomial()
    zs = _companion_roots(coeffs)
    if zs.size != p - 1:
        raise RuntimeError(f"expected {p - 1} Dirichlet points, found {zs.size}")
    gap = match_distance(zs, dirichlet_pencil_eigenvalues(v))
    if gap > cross_tol:
        raise RuntimeError(f"Dirichlet cross-check failed: multiset distance {gap:.3g}")
    d = np.abs(zs[:, None] - zs[None, :]) + np.diag(np.full(zs.size, np.inf))
    if zs.size > 1 and d.min() < 1e-8:
        warnings.warn("Dirichlet eigenvalues collide; divisor points are not simple", RuntimeWarning)
    divisor = [(complex(phi[p - 1](z)), complex(z)) for z in zs]
    branch, generic = branch_points(v)
    return SpectralCurveData(branch, zs, divisor, generic, gap)


def curve_function(v: VerblunskyVector, h, z) -> complex:
    """h det(zI - E(h))."""
    E = build_factors(v).E(h)
    return complex(h * np.linalg.det(z * np.eye(v.p) - E))


def _sqrt_roots(delta, sqrt):
    s = sqrt(delta * delta - 4)
    # pick the sign that avoids cancellation, then use h+ h- = 1
    big = (delta + s) / 2 if abs(delta + s) >= abs(delta - s) else (delta - s) / 2
    return big, 1 / big


def h_branches(v: VerblunskyVector, z, basis=None, sep: float = 1e-8):
    """Roots of h^2 - Delta(z) h + 1, larger modulus first (the + sheet)."""
    if z == 0:
        raise ValueError("z = 0 is a puncture of the curve")
    phi, psi = basis or bloch_basis(v, v.p)
    delta = complex(phi[v.p - 1](z) + psi[v.p](z))
    if abs(delta * delta - 4) < sep:
        raise BranchProximityError(f"z = {z} is within {sep:g} of a branch point")
    hp, hm = _sqrt_roots(delta, np.sqrt)
    if abs(abs(hp) - abs(hm)) < sep:
        raise BranchProximityError("|h+| = |h-| here; the sheets cannot be told apart by magnitude")
    return complex(hp), complex(hm)


def bloch_vector(v: VerblunskyVector, h, z, basis=None, curve_tol: float = 1e-8,
                 dirichlet_sep: float = 1e-6) -> np.ndarray:
    """f_j = h phi_j + ((1 - h phi_{p-1}) / psi_{p-1}) psi_j, normalized by f_{p-1} = 1."""
    p = v.p
    phi, psi = basis or bloch_basis(v, p)
    delta = phi[p - 1](z) + psi[p](z)
    if abs(h * h - delta * h + 1) > curve_tol * max(1.0, abs(h) ** 2):
        raise ValueError("(h, z) is not on the spectral curve")
    den = psi[p - 1](z)
    if abs(den) < dirichlet_sep:
        raise DirichletProximityError("z is too close to a Dirichlet eigenvalue")
    f0 = (1 - h * phi[p - 1](z)) / den
    f = np.array([h * phi[j](z) + f0 * psi[j](z) for j in range(p)], dtype=complex)
    f[p - 1] = 1.0
    return f


def bloch_extended(v: VerblunskyVector, h, z, n_max: int, basis=None):
    """Bloch solution f_j for j = -1..n_max (no renormalization)."""
    phi, psi = basis or bloch_basis(v, n_max)
    p = v.p
    f0 = (1 - h * phi[p - 1](z)) / psi[p - 1](z)
    return {j: h * phi[j](z) + f0 * psi[j](z) for j in range(-1, n_max + 1)}


# asymptotics ----------------------------------------------------------------

SHEET_POINTS = ("P+", "P-", "Q+", "Q-")


def expected_orders(p: int):
    """Order of f_j (power of z) as z -> infinity (P) or z -> 0 (Q) on each sheet."""
    out = {}
    for j in range(p // 2):
        e, o = 2 * j, 2 * j + 1
        m = p // 2 - j - 1
        out[("P+", e)] = out[("P+", o)] = m
        out[("P-", e)] = out[("P-", o)] = -m
        out[("Q-", e)], out[("Q-", o)] = p // 2 - j, m
        out[("Q+", e)], out[("Q+", o)] = -(p // 2 - j), -m
    return out


def expected_constants(v: VerblunskyVector):
    """Leading coefficients of f_j at the four points."""
    a, r, p = v.alpha, v.rho, v.p
    pr = lambda lo: float(np.prod(r[lo:p - 1]))  # prod_{i=lo}^{p-2} rho_i
    out = {}
    for j in range(p // 2):
        e, o = 2 * j, 2 * j + 1
        out[("P-", e)] = -pr(e) / a[p - 2]
        out[("P-", o)] = a[e] / a[p - 2] * pr(o)
        # sign fixed by dividing the product asymptotic f+ f- ~ -conj(a_2j)/a_{p-2}
        # by the P- constant above; it also follows from f_0 = (1 - h phi_1)/psi_1 at p = 2
        out[("P+", e)] = np.conj(a[e]) / pr(e)
        out[("P+", o)] = 1 / pr(o)
        out[("Q-", e)] = -np.conj(a[(e - 1) % p]) * pr(e)
        out[("Q-", o)] = pr(o)
        out[("Q+", e)] = 1 / (a[p - 1] * pr(e))
        out[("Q+", o)] = a[o] / (a[p - 1] * pr(o))
    return out


def _bloch_on_sheets(v, phi, psi, z):
    p = v.p
    delta = phi[p - 1](z) + psi[p](z)
    hp, hm = _sqrt_roots(delta, mpmath.sqrt)
    out = {}
    for name, h in (("+", hp), ("-", hm)):
        f0 = (1 - h * phi[p - 1](z)) / psi[p - 1](z)
        out[name] = [h * phi[j](z) + f0 * psi[j](z) for j in range(p)]
    return out


@dataclass
class OrderReport:
    rows: list = field(default_factory=list)
    slope_tol: float = 0.05
    const_tol: float = 0.01

    @property
    def max_slope_error(self):
        return max(abs(r["slope"] - r["order"]) for r in self.rows)

    @property
    def max_constant_error(self):
        return max(r["constant_rel_error"] for r in self.rows)

    @property
    def passed(self):
        return self.max_slope_error < self.slope_tol and self.max_constant_error < self.const_tol


def asymptotic_orders(v: VerblunskyVector, direction: float = 0.3, dps: int = 80) -> OrderReport:
    """Log-log slopes and leading constants of f_j near z = infinity and z = 0 on both sheets."""
    check_nonzero(v)
    _, generic = branch_points(v)
    if not generic:
        raise NonGenericError("branch points are not distinct")
    p = v.p
    orders = expected_orders(p)
    consts = expected_constants(v)
    report = OrderReport()
    with mpmath.workdps(dps):
        phi, psi = bloch_basis(v, p, exact=True)
        u = mpmath.expjpi(mpmath.mpf(direction) / mpmath.pi)  # exp(i * direction)
        for label, radii in (("P", (10 ** 3, 10 ** 4)), ("Q", (mpmath.mpf(10) ** -3, mpmath.mpf(10) ** -4))):
            vals = [_bloch_on_sheets(v, phi, psi, R * u) for R in radii]
            for sheet in "+-":
                point = label + sheet
                for j in range(p):
                    f1, f2 = vals[0][sheet][j], vals[1][sheet][j]
                    slope = float(mpmath.log(abs(f2) / abs(f1)) / mpmath.log(radii[1] / radii[0]))
                    k = orders[(point, j)]
                    lead = complex(f2 / (radii[1] * u) ** k)
                    want = complex(consts[(point, j)])
                    report.rows.append({
                        "point": point, "j": j, "order": k, "slope": slope,
                        "constant": lead, "expected_constant": want,
                        "constant_rel_error": abs(lead - want) / abs(want),
                    })
    return report
