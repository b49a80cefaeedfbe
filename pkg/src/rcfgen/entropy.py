"""Entropy sources used for seeding and for in-flight reseed draws.

Two implementations share one duck-typed interface:

* ``OsEntropy`` pulls from the operating system pool (``os.urandom``).
* ``SplitMix64`` is a deterministic counter-based 64-bit generator;
  the same seed always yields the same draw sequence, which is what
  makes generator runs and Monte-Carlo p-values reproducible.

Every source provides raw 64-bit words (scalar and vectorized) and
uniform reals drawn strictly inside the open interval (0, 1).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import EntropyFailureError

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Draws of exactly 0.0 are redrawn to keep the open interval; this cap
# only exists so a broken source cannot loop forever.
_MAX_REDRAWS = 128


def _u64_to_unit(words: np.ndarray) -> np.ndarray:
    # 53-bit fraction in [0, 1); zeros are handled by the callers.
    return (words >> np.uint64(11)).astype(np.float64) * 2.0**-53


class SplitMix64:
    """Deterministic counter-based generator (splitmix64 mixing function).

    State is a 64-bit counter advanced by a fixed odd increment; each
    output is a bijective hash of the counter, so arbitrary-size blocks
    can be produced vectorized without changing the stream.
    """

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def u64_array(self, size: int) -> np.ndarray:
        base = self._state
        ctr = np.uint64(base) + np.uint64(_GAMMA) * np.arange(1, size + 1, dtype=np.uint64)
        self._state = (base + _GAMMA * size) & _MASK64
        z = ctr
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniform(self) -> float:
        for _ in range(_MAX_REDRAWS):
            u = self.next_u64() >> 11
            if u:
                return u * 2.0**-53
        raise EntropyFailureError("source kept returning 0.0")

    def uniform_array(self, size: int) -> np.ndarray:
        out = _u64_to_unit(self.u64_array(size))
        for _ in range(_MAX_REDRAWS):
            zeros = out == 0.0
            if not zeros.any():
                return out
            out[zeros] = _u64_to_unit(self.u64_array(int(zeros.sum())))
        raise EntropyFailureError("source kept returning 0.0")


class OsEntropy:
    """Non-deterministic source backed by the operating system pool."""

    def next_u64(self) -> int:
        return int.from_bytes(self._bytes(8), "little")

    def u64_array(self, size: int) -> np.ndarray:
        return np.frombuffer(self._bytes(8 * size), dtype="<u8").copy()

    def uniform(self) -> float:
        for _ in range(_MAX_REDRAWS):
            u = self.next_u64() >> 11
            if u:
                return u * 2.0**-53
        raise EntropyFailureError("os entropy kept returning 0.0")

    def uniform_array(self, size: int) -> np.ndarray:
        out = _u64_to_unit(self.u64_array(size))
        for _ in range(_MAX_REDRAWS):
            zeros = out == 0.0
            if not zeros.any():
                return out
            out[zeros] = _u64_to_unit(self.u64_array(int(zeros.sum())))
        raise EntropyFailureError("os entropy kept returning 0.0")

    @staticmethod
    def _bytes(n: int) -> bytes:
        try:
            return os.urandom(n)
        except OSError as exc:  # pragma: no cover - platform dependent
            raise EntropyFailureError(f"os.urandom failed: {exc}") from exc
