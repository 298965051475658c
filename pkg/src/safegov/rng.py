"""SplitMix64 generator and Fisher-Yates shuffling.

Every seeded operation in the package (corpus splits, fixture generation,
scenario sampling) draws from this generator rather than ``random`` so that
any implementation of the same contract, in any language, reproduces the
exact same splits and fixtures from the same 64-bit seed.

Contract: state advances by the golden-gamma constant 0x9E3779B97F4A7C15;
each output is the finalized mix (xor-shift 30/27/31 with multipliers
0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). Bounded draws reduce the raw
64-bit output modulo the bound. Shuffles walk indices from high to low,
swapping position ``i`` with ``next_below(i + 1)``.
"""

from __future__ import annotations

from .errors import InvalidInputError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Deterministic 64-bit generator with a tiny, portable state."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform-ish integer in [0, bound) via modulo reduction."""
        if bound < 1:
            raise InvalidInputError(f"bound must be >= 1, got {bound}")
        return self.next_u64() % bound

    def next_float(self) -> float:
        """Float in [0, 1) using the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_uniform(self, lo: float, hi: float) -> float:
        return lo + self.next_float() * (hi - lo)


def fisher_yates(items: list, rng: SplitMix64) -> list:
    """Return a shuffled copy of ``items`` driven by ``rng``."""
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out
