"""Seeded substreams.

Every random draw in the package goes through :func:`stream`. A substream is
identified by the base seed plus a tuple of non-negative integer keys and is
built as ``numpy.random.SeedSequence(seed, spawn_key=keys)`` feeding a PCG64
generator. Work is always split into fixed-size chunks, each with its own key,
so the numbers drawn never depend on how many threads consume the chunks.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 1 << 15


def stream(seed, *keys):
    """Generator for substream ``keys`` of ``seed``."""
    if seed is None:
        raise ValueError("a seed is required for reproducible sampling")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def chunk_sizes(count, chunk=CHUNK):
    full, rest = divmod(int(count), chunk)
    return [chunk] * full + ([rest] if rest else [])


def normal_chunks(seed, count, dim, keys=()):
    """Yield the blocks of :func:`standard_normal` one at a time."""
    for i, size in enumerate(chunk_sizes(count)):
        yield stream(seed, *keys, i).standard_normal((size, dim))


def standard_normal(seed, count, dim, keys=(), threads=1):
    """``count x dim`` standard normals assembled from per-chunk substreams."""
    sizes = chunk_sizes(count)

    def draw(i):
        return stream(seed, *keys, i).standard_normal((sizes[i], dim))

    if not sizes:
        return np.empty((0, dim))
    blocks = parallel_map(draw, range(len(sizes)), threads)
    return np.concatenate(blocks, axis=0)


def parallel_map(func, items, threads=1):
    """Ordered map; ``threads`` only changes scheduling, never results."""
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))
