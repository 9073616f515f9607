"""Seed-stream management.

All sampling in the package draws from PCG64 generators keyed by a
``numpy.random.SeedSequence``.  Independent sub-streams are obtained by
spawning children in a fixed, documented order, so per-variable draws are
reproducible regardless of the order in which they are consumed.
"""

from __future__ import annotations

import numpy as np

Seed = "int | np.random.SeedSequence"


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Normalize an int (or tuple of ints, or SeedSequence) to a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn(seed, n: int) -> list[np.random.SeedSequence]:
    """Deterministically derive ``n`` independent child seed sequences."""
    return as_seed_sequence(seed).spawn(n)


def generator(seed) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(seed))


def seed_to_int(seed) -> int:
    """Collapse a seed sequence to a single reproducible 63-bit integer."""
    state = as_seed_sequence(seed).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1] & 0x7FFFFFFF) << 32)
