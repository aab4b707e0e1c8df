"""Counter-based random streams.

Samples are drawn in fixed-size blocks. Block j of a run keyed by `seed`
comes from a Philox generator with key `seed` and counter `j << 192`, so
every sample is a pure function of (seed, sample index) for a given block
size, whatever order or thread the blocks are produced in.
"""
from typing import Iterator, Tuple

import numpy as np

SEED_BITS = 64
_COUNTER_SHIFT = 192


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2 ** SEED_BITS:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def block_generator(seed: int, block: int) -> np.random.Generator:
    if block < 0:
        raise ValueError(f"block index must be non-negative, got {block}")
    return np.random.Generator(np.random.Philox(key=check_seed(seed), counter=block << _COUNTER_SHIFT))


def block_spans(n: int, block_size: int) -> Iterator[Tuple[int, int]]:
    """(block index, sample count) pairs covering n samples."""
    if block_size < 1:
        raise ValueError(f"block size must be positive, got {block_size}")
    for j, start in enumerate(range(0, n, block_size)):
        yield j, min(block_size, n - start)
