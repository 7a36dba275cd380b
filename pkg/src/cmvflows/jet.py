"""Forward-mode derivative arrays.

A :class:`Jet` carries a complex value array together with its derivatives
with respect to a fixed list of real coordinates.  Only the operations needed
to build Floquet CMV loops, their determinants and traces are provided.

The generic helpers at the bottom (``sqrt``, ``det``, ``trace`` ...) accept
either plain numpy arrays or jets, so numeric code can be written once and
differentiated by feeding it a jet.
"""

from __future__ import annotations

import numpy as np


class Jet:
    """Value array ``val`` of shape S and tangent array ``tan`` of shape S + (n,)."""

    __array_ufunc__ = None  # make numpy defer to the reflected operators
    __slots__ = ("val", "tan")

    def __init__(self, val, tan):
        self.val = np.asarray(val, dtype=complex)
        self.tan = np.asarray(tan, dtype=complex)
        if self.tan.shape[:-1] != self.val.shape:
            raise ValueError(f"tangent shape {self.tan.shape} does not fit value shape {self.val.shape}")

    # construction -----------------------------------------------------
    @classmethod
    def seed(cls, x):
        """Jet over the real coordinates (Re x_0, Im x_0, Re x_1, ...) of a 1-d array."""
        x = np.asarray(x, dtype=complex)
        n = x.shape[0]
        tan = np.zeros((n, 2 * n), dtype=complex)
        tan[np.arange(n), 2 * np.arange(n)] = 1.0
        tan[np.arange(n), 2 * np.arange(n) + 1] = 1j
        return cls(x, tan)

    @classmethod
    def zeros(cls, shape, n):
        shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
        return cls(np.zeros(shape, complex), np.zeros(shape + (n,), complex))

    @property
    def n(self):
        return self.tan.shape[-1]

    @property
    def shape(self):
        return self.val.shape

    @property
    def ndim(self):
        return self.val.ndim

    def __len__(self):
        return len(self.val)

    def __repr__(self):
        return f"Jet(val={self.val!r}, n={self.n})"

    # indexing ---------------------------------------------------------
    def __getitem__(self, idx):
        return Jet(self.val[idx], self.tan[idx])

    def __setitem__(self, idx, other):
        if isinstance(other, Jet):
            self.val[idx] = other.val
            self.tan[idx] = other.tan
        else:
            self.val[idx] = other
            self.tan[idx] = 0.0

    # arithmetic -------------------------------------------------------
    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=complex)
        return Jet(other, np.zeros(other.shape + (self.n,), complex))

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.tan + other.tan)
        other = np.asarray(other)
        tan = np.broadcast_to(self.tan, np.broadcast_shapes(self.val.shape, other.shape) + (self.n,))
        return Jet(self.val + other, tan.copy())

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.tan)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val * other.val,
                       self.tan * other.val[..., None] + self.val[..., None] * other.tan)
        other = np.asarray(other)
        return Jet(self.val * other, self.tan * other[..., None])

    __rmul__ = __mul__

    def reciprocal(self):
        inv = 1.0 / self.val
        return Jet(inv, -self.tan * (inv * inv)[..., None])

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __matmul__(self, other):
        if isinstance(other, Jet):
            return Jet(self.val @ other.val,
                       np.einsum("...ij,...jkn->...ikn", self.val, other.tan)
                       + np.einsum("...ijn,...jk->...ikn", self.tan, other.val))
        other = np.asarray(other)
        if other.ndim == 1:
            return Jet(self.val @ other, np.einsum("...ijn,j->...in", self.tan, other))
        return Jet(self.val @ other, np.einsum("...ijn,...jk->...ikn", self.tan, other))

    def __rmatmul__(self, other):
        other = np.asarray(other)
        if self.ndim == 1:
            return Jet(other @ self.val, np.einsum("...ij,jn->...in", other, self.tan))
        return Jet(other @ self.val, np.einsum("...ij,...jkn->...ikn", other, self.tan))

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out = Jet(np.ones_like(self.val), np.zeros_like(self.tan))
        for _ in range(k):
            out = out * self
        return out

    # elementwise functions --------------------------------------------
    def conj(self):
        # coordinates are real, so conjugation commutes with differentiation
        return Jet(self.val.conj(), self.tan.conj())

    conjugate = conj

    @property
    def real(self):
        return Jet(self.val.real, self.tan.real)

    @property
    def imag(self):
        return Jet(self.val.imag, self.tan.imag)

    def sqrt(self):
        r = np.sqrt(self.val)
        return Jet(r, self.tan / (2 * r)[..., None])

    def log(self):
        return Jet(np.log(self.val), self.tan / self.val[..., None])

    def exp(self):
        e = np.exp(self.val)
        return Jet(e, self.tan * e[..., None])

    # reductions -------------------------------------------------------
    def sum(self, axis=None):
        if axis is None:
            return Jet(self.val.sum(), self.tan.reshape(-1, self.n).sum(axis=0))
        axis = axis % self.ndim
        return Jet(self.val.sum(axis=axis), self.tan.sum(axis=axis))

    def prod(self):
        out = Jet(np.ones((), complex), np.zeros(self.n, complex))
        flat = Jet(self.val.reshape(-1), self.tan.reshape(-1, self.n))
        for k in range(flat.val.shape[0]):
            out = out * flat[k]
        return out

    def trace(self):
        return Jet(np.trace(self.val, axis1=-2, axis2=-1),
                   np.trace(self.tan, axis1=-3, axis2=-2))

    def det(self):
        # d det = tr(adj(A) dA); the adjugate comes from the SVD so singular A is fine
        u, s, vh = np.linalg.svd(self.val)
        n = s.shape[-1]
        others = np.stack([np.prod(np.delete(s, i, axis=-1), axis=-1) for i in range(n)], axis=-1)
        phase = np.linalg.det(u) * np.linalg.det(vh)
        adj = phase[..., None, None] * np.einsum("...ij,...i,...ki->...jk", vh.conj(), others, u.conj())
        d = np.linalg.det(self.val)
        return Jet(d, np.einsum("...ij,...jin->...n", adj, self.tan))

    def swapaxes(self, a, b):
        a, b = a % self.ndim, b % self.ndim
        return Jet(np.swapaxes(self.val, a, b), np.swapaxes(self.tan, a, b))

    def transpose_last(self):
        return self.swapaxes(-1, -2)

    def derivative(self):
        """Split tangents into (d/dx_k, d/dy_k) arrays."""
        return self.tan[..., 0::2], self.tan[..., 1::2]


# generic helpers ---------------------------------------------------------

def is_jet(x):
    return isinstance(x, Jet)


def conj(x):
    return x.conj() if isinstance(x, Jet) else np.conj(x)


def sqrt(x):
    return x.sqrt() if isinstance(x, Jet) else np.sqrt(x)


def log(x):
    return x.log() if isinstance(x, Jet) else np.log(x)


def real(x):
    return x.real if isinstance(x, Jet) else np.real(x)


def imag(x):
    return x.imag if isinstance(x, Jet) else np.imag(x)


def det(x):
    return x.det() if isinstance(x, Jet) else np.linalg.det(x)


def trace(x):
    return x.trace() if isinstance(x, Jet) else np.trace(x, axis1=-2, axis2=-1)


def prod(x):
    return x.prod() if isinstance(x, Jet) else np.prod(x)


def total(x, axis=None):
    return x.sum(axis) if isinstance(x, Jet) else np.sum(x, axis=axis)


def zeros_like_kind(template, shape):
    """Zero array of ``shape`` that is a jet iff ``template`` is."""
    if isinstance(template, Jet):
        return Jet.zeros(tuple(shape), template.n)
    return np.zeros(shape, complex)


def swapaxes(x, a, b):
    return x.swapaxes(a, b) if isinstance(x, Jet) else np.swapaxes(x, a, b)
