"""Deterministic seeding and order-preserving worker pools.

Replicated work derives per-replicate RNG streams from (master seed,
replicate index), never from scheduling order, so results are identical
at any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def replicate_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Independent child stream for one replicate of a seeded run."""
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))


def parallel_map(fn, items, threads: int = 1) -> list:
    """map() preserving input order, optionally on a thread pool.

    Item functions must not share mutable state; each should derive any
    randomness from its own argument (e.g. via replicate_seed).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, items))
