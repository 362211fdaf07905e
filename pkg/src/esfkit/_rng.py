"""Reproducible random streams.

Every stream is a Philox generator (counter-based) seeded from a
``SeedSequence`` built from the user seed plus a key path such as a
replicate or block index.  Two streams with different keys never share
state, so replicates can be evaluated in any order (or in parallel) and
the merged result is unchanged.
"""
from __future__ import annotations

import numpy as np

BLOCK_SIZE = 4096


def stream(seed: int, *key: int) -> np.random.Generator:
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and stream keys must be non-negative integers")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def blocks(total: int, block_size: int = BLOCK_SIZE):
    """Yield ``(block_index, size)`` pairs covering ``total`` replicates."""
    if total < 0:
        raise ValueError("total must be non-negative")
    index = 0
    start = 0
    while start < total:
        size = min(block_size, total - start)
        yield index, size
        index += 1
        start += size
