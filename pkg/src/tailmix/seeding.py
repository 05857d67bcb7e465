"""Deterministic RNG streams.

Every random draw in the package flows through a generator built here. A
root seed plus an integer path (restart index, replicate index, ...)
fully determines the stream, so runs are reproducible and independent
substreams never collide.
"""

from __future__ import annotations

import numpy as np

# Fixed root seed used when the caller supplies none.
DEFAULT_SEED = 20260814


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return a generator for the substream identified by ``path``.

    The same (seed, path) pair always yields the same stream, and distinct
    paths yield statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))


def child_seed(seed: int, *path: int) -> int:
    """Derive a 63-bit integer seed for the substream at ``path``.

    Useful when an API takes a plain integer seed but the caller needs
    independent streams per work item.
    """
    state = np.random.SeedSequence(seed, spawn_key=path).generate_state(2, np.uint64)
    return int(state[0] ^ (state[1] << np.uint64(1))) & ((1 << 63) - 1)
