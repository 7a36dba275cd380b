"""SplitMix64 generator used for every seeded draw.

The stream is fully specified so randomized checks can be reproduced in other
implementations:

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)                      (all arithmetic mod 2**64)

Uniform doubles are ``(next() >> 11) * 2**-53``.  A random Verblunsky
coefficient is ``r * exp(2 pi i u)`` with ``r = rmin + (rmax - rmin) * u'``,
drawing ``u'`` (radius) before ``u`` (angle).
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0 ** -53)

    def uniforms(self, n: int, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        return np.array([self.uniform(lo, hi) for _ in range(n)])

    def normal(self) -> float:
        # Box-Muller, one output per two uniforms
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2 * math.pi * u2)

    def complex_normal(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        vals = [complex(self.normal(), self.normal()) for _ in range(n)]
        return np.array(vals, dtype=complex).reshape(shape)

    def disk(self, n: int, rmax: float = 0.6, rmin: float = 0.0) -> np.ndarray:
        out = np.empty(n, complex)
        for j in range(n):
            r = self.uniform(rmin, rmax)
            th = self.uniform(0.0, 2 * math.pi)
            out[j] = r * complex(math.cos(th), math.sin(th))
        return out

    def integer(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.next_u64() % n
