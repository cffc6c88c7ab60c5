"""Deterministic keyed randomness.

The generator family is SplitMix64 (Steele-Lea-Vigna).  Every consumer keys a
stream by a tuple of 64-bit integers; the same key yields the same stream on
any platform and under any scheduling, which is what makes trial-level
reproducibility possible.  The keying scheme is fixed:

    key(k0, k1, ..., km) = mix(... mix(mix(k0) ^ k1) ... ^ km)

where ``mix`` is the SplitMix64 finalizer, and the stream generated from a key
is the SplitMix64 output sequence seeded at that key.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix(z: int) -> int:
    """SplitMix64 finalizer: a 64-bit bijection with good avalanche."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def key(*parts: int) -> int:
    """Combine integer key parts into a single 64-bit stream key."""
    acc = 0
    for p in parts:
        acc = mix((acc ^ p) & _MASK)
    return acc


class Stream:
    """SplitMix64 output stream seeded at a key."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix(self._state)

    def below(self, bound: int) -> int:
        """Unbiased uniform integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % bound)
        r = self.next_u64()
        while r >= limit:
            r = self.next_u64()
        return r % bound

    def bit(self) -> int:
        return self.next_u64() >> 63


def stream(*parts: int) -> Stream:
    """Stream keyed by the given parts (see module docstring for the scheme)."""
    return Stream(key(*parts))
