"""Deterministic, splittable random streams.

Every stream is a counter-based Philox generator keyed by
``(master seed, tag, index)``. Monte Carlo work is split into fixed-size
blocks with one stream per block, so results do not depend on how many
workers process the blocks.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK = 1 << 15


def stream(seed: int, tag: str = "", index: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    key = np.random.SeedSequence([int(seed), zlib.crc32(tag.encode()), int(index)])
    return np.random.Generator(np.random.Philox(key))


def blocks(n: int, block: int = BLOCK):
    return [(i, min(i + block, n)) for i in range(0, n, block)]


def run_blocks(n, seed, tag, fn, threads=1, block=BLOCK):
    """Call ``fn(rng, start, stop)`` on each block and concatenate along axis 0."""
    jobs = blocks(n, block)

    def one(k):
        start, stop = jobs[k]
        return fn(stream(seed, tag, k), start, stop)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(one, range(len(jobs))))
    else:
        parts = [one(k) for k in range(len(jobs))]
    return np.concatenate(parts, axis=0) if parts else np.empty(0)
