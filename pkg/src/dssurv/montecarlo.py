"""Seeded random streams and chunked Monte Carlo reduction.

Every Monte Carlo consumer splits its draws into fixed-size chunks.  Chunk
``i`` always draws from the stream keyed ``(seed, i, ...)``, so results are
identical whatever the number of workers; counts are summed in chunk order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .errors import InvalidInputError

_CELLS_PER_CHUNK = 1 << 22
_MAX_CHUNK = 1 << 16


def stream_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise InvalidInputError(f"seed must be a non-negative integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def chunk_size_for(m: int) -> int:
    """Draws per chunk for spacing vectors of length ``m + 1``."""
    return max(64, min(_MAX_CHUNK, _CELLS_PER_CHUNK // (m + 1)))


def chunk_sizes(n_draws: int, chunk: int) -> list[int]:
    if n_draws < 1:
        raise InvalidInputError(f"n_draws must be at least 1, got {n_draws}")
    full, rest = divmod(n_draws, chunk)
    return [chunk] * full + ([rest] if rest else [])


def reduce_chunks(
    n_draws: int,
    chunk: int,
    task: Callable[[int, int], np.ndarray],
    workers: int = 1,
) -> np.ndarray:
    """Sum ``task(chunk_index, size)`` over all chunks.

    ``task`` returns integer counts, so the total does not depend on
    ``workers``.
    """
    sizes = chunk_sizes(n_draws, chunk)
    if workers is None or workers <= 1 or len(sizes) == 1:
        parts = [task(i, n) for i, n in enumerate(sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(task, range(len(sizes)), sizes))
    total = parts[0].copy()
    for p in parts[1:]:
        total += p
    return total
