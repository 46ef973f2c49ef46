"""Reproducible random streams.

A stream is addressed by a 64-bit (seed, stream_id) pair.  Reconstructing a
stream with the same address replays the identical draw sequence; distinct
stream ids are statistically independent (PCG64 seeded through SeedSequence
spawn keys).  Streams are cheap value objects: every parallel unit (column,
chain, replicate) owns its own id and never shares a live stream.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RngStream"]

_MASK64 = (1 << 64) - 1


class RngStream:
    """One addressable substream of a master seed.

    Draw methods advance internal state, so a single instance yields a
    sequence; two instances built from the same (seed, stream_id) yield the
    same sequence from the start.
    """

    __slots__ = ("seed", "stream_id", "_gen")

    def __init__(self, seed: int, stream_id: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream_id = int(stream_id) & _MASK64
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def child(self, offset: int) -> "RngStream":
        """A fresh stream at stream_id + offset (same seed)."""
        return RngStream(self.seed, self.stream_id + int(offset))

    # Raw draws; distribution-level ops with validation live in qggm.prior.
    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def standard_exponential(self, size=None):
        return self._gen.standard_exponential(size)

    def standard_gamma(self, shape, size=None):
        return self._gen.standard_gamma(shape, size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def permutation(self, x):
        return self._gen.permutation(x)
