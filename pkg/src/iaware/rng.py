"""Keyed random streams.

Every random draw in a run comes from a generator keyed by ``(seed, *key)``,
so a draw for a given (stage, frame, label) is the same no matter how many
other draws happened before it or in which order tracks are processed.
"""

from __future__ import annotations

import numpy as np

# stage identifiers used as the first key component
SCENARIO = 0
SCAN = 1
PROPAGATE = 2
BIRTH = 3
RESAMPLE = 4


class RandomSource:
    """Splittable source of independent ``numpy.random.Generator`` streams."""

    def __init__(self, seed: int = 0):
        if int(seed) != seed or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
        self.seed = int(seed)

    def stream(self, *key: int) -> np.random.Generator:
        """Generator for the substream named by ``key`` (non-negative ints)."""
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"
