"""Counter-based random substreams.

Every statistical variable owns one family of Philox streams, keyed by
``(seed, variable, stream)``. The sample index range is split into
``n_streams`` contiguous chunks; chunk ``s`` of variable ``v`` is drawn from
stream ``(v, s)`` and the chunks are concatenated in stream order. Output is
therefore fixed by ``(seed, n_streams)`` alone, whatever the thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

__all__ = ["VAR_R0", "VAR_CHI", "VAR_THETA", "VAR_XY", "VAR_PHI", "generator", "chunk_sizes", "map_streams"]

VAR_R0 = 0
VAR_CHI = 1
VAR_THETA = 2
VAR_XY = 3
VAR_PHI = 4

T = TypeVar("T")


def generator(seed: int, variable: int, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(variable, stream))
    return np.random.Generator(np.random.Philox(ss))


def chunk_sizes(n: int, n_streams: int) -> list[int]:
    """Sizes of the contiguous per-stream chunks (first ``n % n_streams`` get one extra)."""
    base, extra = divmod(n, n_streams)
    return [base + (1 if s < extra else 0) for s in range(n_streams)]


def map_streams(
    work: Callable[[int, int], T], n: int, n_streams: int, n_threads: int = 1
) -> Sequence[T]:
    """Run ``work(stream, size)`` for every stream; results come back in stream order."""
    sizes = chunk_sizes(n, n_streams)
    if n_threads <= 1 or n_streams == 1:
        return [work(s, m) for s, m in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(work, range(n_streams), sizes))
