"""Deterministic seed derivation.

Every randomized operation in this package takes an explicit integer seed
and derives any internal streams from it by counter-based splitting, so
results are reproducible and independent of execution order or worker
count. The split uses ``numpy.random.SeedSequence`` spawn keys: two calls
with the same master seed and counters always yield the same child seed,
and distinct counters yield statistically independent streams.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

# Used by the CLI when --seed is omitted. Never wall-clock entropy.
DEFAULT_SEED = 0


def check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise InvalidInputError(f"seed must be an integer, got {type(seed).__name__}")
    if seed < 0:
        raise InvalidInputError(f"seed must be nonnegative, got {seed}")
    return int(seed)


def substream_seed(master_seed: int, *counters: int) -> int:
    """Derive a child seed from ``master_seed`` and a counter tuple."""
    ss = np.random.SeedSequence(check_seed(master_seed), spawn_key=tuple(counters))
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.default_rng(check_seed(seed))
