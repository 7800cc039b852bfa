"""Seeded random streams keyed by (master seed, indices).

Every Monte Carlo loop draws its randomness from ``stream(seed, ...)`` with
the sample or block index as a key, so results do not depend on the order in
which blocks are evaluated.
"""

import numpy as np

BLOCK = 256


def stream(seed: int, *keys: int) -> np.random.Generator:
    if seed is None:
        raise ValueError("a seed is required")
    if int(seed) < 0 or any(int(k) < 0 for k in keys):
        raise ValueError("seeds and stream keys must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def blocks(n: int, size: int = BLOCK):
    """Yield (block_index, start, stop) covering range(n)."""
    for b, start in enumerate(range(0, n, size)):
        yield b, start, min(n, start + size)
