"""Seeded, portable random streams.

The generator is counter-based splitmix64: draw ``i`` of a stream with seed
``s`` is ``mix64((s + (i+1) * GAMMA) mod 2^64)`` where GAMMA is the odd
golden-ratio constant 0x9E3779B97F4A7C15 and ``mix64`` is the xor-shift /
multiply finalizer with constants 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB
and shifts 30, 27, 31.  Uniform doubles take the top 53 bits:
``u = ((z >> 11) + 0.5) * 2^-53``, which lies strictly inside (0, 1).

Because output depends only on (seed, position), batch draws vectorize to
the exact sequence scalar draws produce, and substreams derive from the seed
alone: ``substream(k)`` has seed ``mix64((seed + (k+1) * SUBSTREAM_GAMMA)
mod 2^64)`` with SUBSTREAM_GAMMA = 0xD1B54A32D192ED03.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_SUBSTREAM_GAMMA = 0xD1B54A32D192ED03
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TO_UNIT = 2.0**-53


def _mix64(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class RandomStream:
    """Deterministic stream of variates; equal seeds give equal sequences."""

    __slots__ = ("seed", "position")

    def __init__(self, seed: int, position: int = 0):
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise DomainError(f"seed must be an integer, got {seed!r}")
        if position < 0:
            raise DomainError("position must be >= 0")
        self.seed = seed & _MASK
        self.position = position

    def _next_u64(self) -> int:
        self.position += 1
        return _mix64(self.seed + self.position * _GAMMA)

    def uniform(self) -> float:
        """One double in the open interval (0, 1)."""
        return ((self._next_u64() >> 11) + 0.5) * _TO_UNIT

    def uniforms(self, count: int) -> np.ndarray:
        """Vectorized batch of uniforms, bit-identical to ``count`` scalar draws."""
        if count < 0:
            raise DomainError("count must be >= 0")
        idx = np.arange(self.position + 1, self.position + count + 1, dtype=np.uint64)
        z = (np.uint64(self.seed) + idx * np.uint64(_GAMMA))
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self.position += count
        return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TO_UNIT

    def exponential(self, rate: float = 1.0) -> float:
        """Exponential draw by inverse transform; consumes one position."""
        if not (rate > 0.0):
            raise DomainError(f"rate must be positive, got {rate!r}")
        return -math.log(self.uniform()) / rate

    def exponentials(self, count: int, rate: float = 1.0) -> np.ndarray:
        if not (rate > 0.0):
            raise DomainError(f"rate must be positive, got {rate!r}")
        return -np.log(self.uniforms(count)) / rate

    def gamma_int(self, shape: int, rate: float = 1.0) -> float:
        """Gamma draw with integer shape as a sum of exponentials; consumes ``shape`` positions."""
        if not isinstance(shape, int) or shape < 1:
            raise DomainError(f"shape must be an integer >= 1, got {shape!r}")
        return float(np.sum(self.exponentials(shape, rate)))

    def substream(self, index: int) -> "RandomStream":
        """Independent stream derived from (seed, index); parent state is untouched."""
        if index < 0:
            raise DomainError("substream index must be >= 0")
        return RandomStream(_mix64(self.seed + (index + 1) * _SUBSTREAM_GAMMA))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed:#x}, position={self.position})"
