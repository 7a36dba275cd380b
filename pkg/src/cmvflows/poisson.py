"""Wirtinger derivatives, the Ablowitz-Ladik bracket and the Sklyanin bracket.

Observables are functions of the coefficient array.  When ``Observable.jet``
is true the function must also accept a :class:`~cmvflows.jet.Jet`, which
gives exact forward-mode derivatives over the real coordinates
(Re alpha_j, Im alpha_j).  Otherwise central differences are used.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jet
from .cmv import VerblunskyVector, build_factors
from .conserved import i_values, k_value, p_value
from .jet import Jet
from .laurent import LaurentMatrix, j_sharp, pairing

FD_STEP = 1e-6


@dataclass(frozen=True)
class Observable:
    arity: int
    evaluate: Callable
    label: str = ""
    jet: bool = True

    def __call__(self, v):
        a = v.alpha if isinstance(v, VerblunskyVector) else v
        if len(a) != self.arity:
            raise ValueError(f"{self.label}: expected {self.arity} coefficients, got {len(a)}")
        out = self.evaluate(a)
        return out if isinstance(out, Jet) else complex(out)

    def __add__(self, other):
        return Observable(self.arity, lambda a: self.evaluate(a) + other.evaluate(a),
                          f"{self.label} + {other.label}", self.jet and other.jet)

    def __sub__(self, other):
        return Observable(self.arity, lambda a: self.evaluate(a) - other.evaluate(a),
                          f"{self.label} - {other.label}", self.jet and other.jet)

    def __rmul__(self, c):
        return Observable(self.arity, lambda a: c * self.evaluate(a), f"{c}*{self.label}", self.jet)


@dataclass(frozen=True)
class WirtingerGradient:
    d_alpha: np.ndarray
    d_alphabar: np.ndarray


# observables -------------------------------------------------------------

def coordinate(j: int, p: int) -> Observable:
    return Observable(p, lambda a: a[j], f"alpha_{j}")


def conj_coordinate(j: int, p: int) -> Observable:
    return Observable(p, lambda a: jet.conj(a[j]), f"conj(alpha_{j})")


def abs2(j: int, p: int) -> Observable:
    return Observable(p, lambda a: a[j] * jet.conj(a[j]), f"|alpha_{j}|^2")


def re_coordinate(j: int, p: int) -> Observable:
    return Observable(p, lambda a: jet.real(a[j]), f"Re alpha_{j}")


def im_coordinate(j: int, p: int) -> Observable:
    return Observable(p, lambda a: jet.imag(a[j]), f"Im alpha_{j}")


def P_observable(p: int) -> Observable:
    return Observable(p, p_value, "P")


def log_P(p: int) -> Observable:
    return Observable(p, lambda a: jet.total(0.5 * jet.log(1.0 - a * jet.conj(a))), "log P")


def _part(x, part):
    if part == "re":
        return jet.real(x)
    if part == "im":
        return jet.imag(x)
    return x


def I_observable(j: int, p: int, part: str = "") -> Observable:
    """I_j (or its real / imaginary part), recomputed from scratch at each call."""
    if abs(j) > p // 2:
        raise ValueError(f"I_j needs |j| <= {p // 2}")
    return Observable(p, lambda a: _part(i_values(a)[j + p // 2], part), f"{part}I_{j}")


def K_observable(n: int, p: int, part: str = "") -> Observable:
    if not 1 <= n <= p // 2:
        raise ValueError(f"K_n needs 1 <= n <= {p // 2}")
    return Observable(p, lambda a: _part(k_value(a, n), part), f"{part}K_{n}")


def al_hamiltonian(p: int) -> Observable:
    """Re K_1 - 2 log P, the generator of the defocusing lattice equation."""
    return K_observable(1, p, "re") - 2 * log_P(p)


# derivatives -------------------------------------------------------------

def _real_derivatives_central(obs: Observable, a: np.ndarray, step: float):
    p = a.size
    dx = np.empty(p, complex)
    dy = np.empty(p, complex)
    for j in range(p):
        e = np.zeros(p, complex)
        e[j] = step
        dx[j] = (obs.evaluate(a + e) - obs.evaluate(a - e)) / (2 * step)
        e[j] = 1j * step
        dy[j] = (obs.evaluate(a + e) - obs.evaluate(a - e)) / (2 * step)
    return dx, dy


def wirtinger(obs: Observable, v: VerblunskyVector, method: str = "auto",
              step: float = FD_STEP) -> WirtingerGradient:
    """d/d alpha_j = (d/dx - i d/dy)/2 and d/d conj(alpha_j) = (d/dx + i d/dy)/2."""
    a = np.asarray(v.alpha, complex)
    if method == "auto":
        method = "dual" if obs.jet else "central"
    if method == "dual":
        out = obs.evaluate(Jet.seed(a))
        if not isinstance(out, Jet):  # constant observable
            dx = dy = np.zeros(a.size, complex)
        else:
            dx, dy = out.derivative()
    elif method == "central":
        if np.max(np.abs(a)) + 2 * step >= 1:
            raise ValueError("point too close to the boundary for central differences")
        dx, dy = _real_derivatives_central(obs, a, step)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WirtingerGradient((dx - 1j * dy) / 2, (dx + 1j * dy) / 2)


def al_bracket(f: Observable, g: Observable, v: VerblunskyVector,
               grads: tuple | None = None) -> complex:
    """2i sum_j rho_j^2 (f_alpha g_alphabar - f_alphabar g_alpha)."""
    gf, gg = grads if grads is not None else (wirtinger(f, v), wirtinger(g, v))
    r2 = v.rho ** 2
    return complex(2j * np.sum(r2 * (gf.d_alpha * gg.d_alphabar - gf.d_alphabar * gg.d_alpha)))


def hamiltonian_field(H: Observable, v: VerblunskyVector) -> np.ndarray:
    """Components {H, alpha_j} = -2i rho_j^2 dH/d conj(alpha_j)."""
    return -2j * v.rho ** 2 * wirtinger(H, v).d_alphabar


def bracket_observable(f: Observable, g: Observable) -> Observable:
    """{f, g} as an observable (differentiated by central differences)."""
    def ev(a):
        return al_bracket(f, g, VerblunskyVector(a))
    return Observable(f.arity, ev, f"{{{f.label}, {g.label}}}", jet=False)


# Sklyanin bracket on the coordinate functions ------------------------------

def _coordinate_gradients(v: VerblunskyVector, a: int):
    """Left and right gradients (D, D') of F_a = -Im alpha_a on the factor pair.

    The coordinate lives on g^e for even a and on g^o for odd a; the gradient
    on the other factor is zero.  Gradients of G_a = Re alpha_a are i times these.
    """
    F = build_factors(v)
    p = v.p
    Eaa = np.zeros((p, p))
    Eaa[a, a] = 1.0
    g = LaurentMatrix.constant(F.ge) if a % 2 == 0 else F.go
    zero = LaurentMatrix.zero(p)
    D, Dp = g @ Eaa, Eaa @ g
    if a % 2 == 0:
        return (D, zero), (Dp, zero)
    return (zero, D), (zero, Dp)


def _sklyanin(grad_phi, grad_psi) -> float:
    (D1, D2), (Dp1, Dp2) = grad_phi
    (E1, E2), (Ep1, Ep2) = grad_psi
    out = 0.0
    for X, Y in ((Dp1, Ep1), (Dp2, Ep2)):
        out += 0.5 * pairing(j_sharp(X), Y)
    for X, Y in ((D1, E1), (D2, E2)):
        out -= 0.5 * pairing(j_sharp(X), Y)
    return out


def sklyanin_coordinate_brackets(v: VerblunskyVector, a: int, b: int) -> dict:
    """{F_a,F_b}, {G_a,G_b}, {F_a,G_b}, {G_a,F_b} with F = -Im alpha, G = Re alpha."""
    for idx in (a, b):
        if not 0 <= idx < v.p:
            raise ValueError(f"index {idx} outside 0..{v.p - 1}")

    def scaled(grad, c):
        (D1, D2), (Dp1, Dp2) = grad
        return (c * D1, c * D2), (c * Dp1, c * Dp2)

    Fa = _coordinate_gradients(v, a)
    Fb = _coordinate_gradients(v, b)
    Ga, Gb = scaled(Fa, 1j), scaled(Fb, 1j)
    return {"FF": _sklyanin(Fa, Fb), "GG": _sklyanin(Ga, Gb),
            "FG": _sklyanin(Fa, Gb), "GF": _sklyanin(Ga, Fb)}


def complex_coordinate_bracket(table: dict) -> complex:
    """{G_a - i F_a, G_b + i F_b} from a real bracket table (this is {alpha_a, conj alpha_b})."""
    return table["GG"] + 1j * table["GF"] - 1j * table["FG"] + table["FF"]


# involution ----------------------------------------------------------------

def involutive_family(p: int) -> list:
    obs = [P_observable(p), I_observable(0, p, "re")]
    for j in range(1, p // 2):
        obs += [I_observable(j, p, "re"), I_observable(j, p, "im")]
    return obs


def involution_check(v: VerblunskyVector, tol: float = 1e-8) -> dict:
    """Max |{A, B}| over pairs of conserved quantities."""
    obs = involutive_family(v.p)
    grads = [wirtinger(o, v) for o in obs]
    pairs = []
    for (i, f), (j, g) in itertools.combinations(enumerate(obs), 2):
        val = al_bracket(f, g, v, grads=(grads[i], grads[j]))
        pairs.append({"a": f.label, "b": g.label, "abs": abs(val)})
    max_abs = max((q["abs"] for q in pairs), default=0.0)
    return {"pairs": pairs, "max_abs": max_abs, "tol": tol, "pass": bool(max_abs < tol)}
