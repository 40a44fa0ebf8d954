"""Reproducible random streams split from one root seed.

Work is cut into fixed-size blocks and each block gets its own child of
``SeedSequence(root)``.  Results depend only on the root seed and the block
size, never on how many workers process the blocks; callers reduce the block
results in block order.
"""

from __future__ import annotations

import numpy as np

BLOCK = 1024


def spawn_generators(seed: int, total: int, block: int = BLOCK):
    """List of ``(generator, count)`` covering ``total`` draws in block order."""
    nblocks = max(1, -(-total // block))
    children = np.random.SeedSequence(seed).spawn(nblocks)
    out = []
    left = total
    for ss in children:
        k = min(block, left)
        out.append((np.random.default_rng(ss), k))
        left -= k
    return out


def generator(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed))
