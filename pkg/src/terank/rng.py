"""Deterministic seeded randomness: SplitMix64 stream + Box-Muller normals.

The stream contract is part of the package's reproducibility surface:
golden files and synthetic truth tables depend on the exact bit sequence,
so numpy's RNG is not used anywhere. Bulk fills go through a compiled
kernel when the extension built, with a bit-identical pure-Python
fallback selected here at import time.
"""
from __future__ import annotations

import math

import numpy as np

try:
    from . import _splitmix as _kernels

    BACKEND = "compiled"
except ImportError:  # extension not built
    from . import _splitmix_py as _kernels

    BACKEND = "python"

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_TWO_NEG53 = 1.0 / 9007199254740992.0
_TWO_PI = 6.283185307179586


class SplitMix64:
    """One deterministic stream. Instances are single-threaded.

    gaussian() caches the second Box-Muller draw of each pair; the cache
    lives and dies with the instance, so a fresh stream never inherits a
    spare from another.
    """

    __slots__ = ("_state", "_has_spare", "_spare")

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._has_spare = False
        self._spare = 0.0

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        # 53-bit mantissa, [0, 1)
        return (self.next_u64() >> 11) * _TWO_NEG53

    def gaussian(self) -> float:
        if self._has_spare:
            self._has_spare = False
            return self._spare
        u1 = self.uniform()
        u2 = self.uniform()
        if u1 <= 0.0:
            u1 = _TWO_NEG53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = _TWO_PI * u2
        z1 = r * math.sin(theta)
        self._spare = z1
        self._has_spare = True
        return r * math.cos(theta)

    def uniforms(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        self._state = _kernels.fill_uniform(out, self._state)
        return out

    def gaussians(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        self._state, self._has_spare, self._spare = _kernels.fill_gaussian(
            out, self._state, self._has_spare, self._spare
        )
        return out
