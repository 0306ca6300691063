"""Deterministic, splittable random streams.

Every stochastic draw in a run comes from a named substream that is a pure
function of (master_seed, seed_index, purpose, ...), so campaigns can run
seeds in any order or in parallel and still reproduce byte-identical
results, and perturbing one traffic profile never shifts the draws of
another.
"""

from __future__ import annotations

import numpy as np

# purpose tags; part of the reproducibility contract, do not renumber
STREAM_CHANNEL = 1
STREAM_TRAFFIC = 2
STREAM_BLER = 3
STREAM_RACH = 4
STREAM_MOBILITY = 5


def substream(*key: int) -> np.random.Generator:
    """Independent generator for an integer key path."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(tuple(int(k) for k in key))))
