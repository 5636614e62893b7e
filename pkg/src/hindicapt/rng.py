"""Deterministic random number generation.

Corpus synthesis must produce byte-identical output for a given seed on
every platform, so randomness goes through a small splitmix64 generator
instead of the process-global RNG. Substreams (one per corpus entry) are
derived by hashing the master seed together with the entry id.
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """splitmix64 stream; 64-bit state, one multiply-xorshift mix per draw."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n). Rejection sampling, no modulo bias."""
        if n <= 0:
            raise ValueError("randrange() requires n >= 1")
        limit = _MASK64 + 1 - (_MASK64 + 1) % n
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()


def derive_seed(seed: int, *parts) -> int:
    """Derive a substream seed from a master seed and identifying parts.

    Parts may be ints or strings; the same inputs always yield the same
    64-bit result.
    """
    acc = _mix(seed & _MASK64)
    for part in parts:
        if isinstance(part, str):
            data = part.encode("utf-8")
        elif isinstance(part, int):
            data = part.to_bytes(16, "little", signed=True)
        else:
            raise TypeError(f"cannot derive seed from {type(part).__name__}")
        for i in range(0, len(data), 8):
            chunk = int.from_bytes(data[i : i + 8], "little")
            acc = _mix(acc ^ (chunk + _GAMMA * (i // 8 + 1)) & _MASK64)
    return acc
