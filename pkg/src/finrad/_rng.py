"""Seeded PRNG streams.

All randomness flows through counter-based Philox generators keyed by
(user seed, fixed stream id[, substream]) so that every purpose — slope
draws, Cartesian draws, noise, Monte-Carlo masks and bases, experiment
cells — has an independent, reproducible stream.  Cross-language
reimplementations can match by using Philox4x64 with the same
SeedSequence-style key spawning.
"""

from __future__ import annotations

import numpy as np

# stream ids, one per purpose; never renumber
SLOPES = 1
CARTESIAN = 2
NOISE = 3
MC_MASKS = 4
MC_BASES = 5
CELLS = 6

__all__ = ["stream", "SLOPES", "CARTESIAN", "NOISE", "MC_MASKS", "MC_BASES", "CELLS"]


def stream(seed: int, stream_id: int, *sub: int) -> np.random.Generator:
    """Generator for a fixed purpose, optionally sub-keyed (e.g. per sample)."""
    key = (int(seed), int(stream_id)) + tuple(int(s) for s in sub)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
