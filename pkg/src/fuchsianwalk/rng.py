"""Counter-based splitmix64 random streams.

Every consumer draws from a stream addressed by (seed, index): the initial
state is a pure function of those two integers and draw t is a pure function
of (state, t).  The vectorized helpers reproduce the scalar stream bit for
bit, which is what makes parallel simulation reproducible: work can be
split any way at all without changing a single output.

Stream derivation: state = mix64((seed XOR (index+1)*GOLDEN) + GOLDEN), all
mod 2**64.  Each draw advances the state by GOLDEN and mixes.  Uniform
deviates take the top 53 bits over 2**53, the coarsest grid that still fills
a float64 mantissa.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_U53_INV = 2.0 ** -53


def mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def avalanche(x: int) -> int:
    """One splitmix64 step from state x: advance by the golden gamma, mix."""
    return mix64((x + GOLDEN) & MASK64)


def stream_state(seed: int, index: int) -> int:
    """Initial stream state for sample `index` under `seed` (both mod 2**64)."""
    if index < 0:
        raise ValueError("sample index must be non-negative")
    return avalanche((seed & MASK64) ^ (((index + 1) * GOLDEN) & MASK64))


class SplitMix64:
    """Scalar splitmix64 stream under the (seed, index) derivation contract."""

    __slots__ = ("_state",)

    def __init__(self, state: int):
        self._state = state & MASK64

    @classmethod
    def for_sample(cls, seed: int, index: int) -> "SplitMix64":
        return cls(stream_state(seed, index))

    @property
    def state(self) -> int:
        return self._state

    def next_u64(self) -> int:
        self._state = (self._state + GOLDEN) & MASK64
        return mix64(self._state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * _U53_INV

    def randbelow(self, m: int) -> int:
        """Uniform integer in [0, m) by rejection; exact, no modulo bias."""
        if m <= 0:
            raise ValueError("randbelow needs a positive bound")
        limit = ((1 << 64) // m) * m
        while True:
            z = self.next_u64()
            if z < limit:
                return z % m


# Vectorized twins.  All arithmetic stays in uint64 *arrays*: numpy scalar
# uint64 ops warn on wraparound while array ops wrap silently, and silent
# two's-complement wrap is exactly what the contract needs.

def _mix64_array(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def stream_states(seed: int, indices: np.ndarray) -> np.ndarray:
    """Initial states for an array of sample indices; matches stream_state."""
    idx = np.asarray(indices, dtype=np.uint64)
    x = np.uint64(seed & MASK64) ^ ((idx + np.uint64(1)) * np.uint64(GOLDEN))
    return _mix64_array(x + np.uint64(GOLDEN))


def advance_uniforms(states: np.ndarray) -> np.ndarray:
    """Advance each stream one draw in place; return uniforms in [0, 1)."""
    states += np.uint64(GOLDEN)
    z = _mix64_array(states)
    return (z >> np.uint64(11)).astype(np.float64) * _U53_INV
