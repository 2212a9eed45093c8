"""Counter-based seed derivation.

Every random quantity is drawn from a generator built from a *seed path*:
a tuple ``(master_seed, k1, k2, ...)`` of non-negative integers.  The path is
fed to :class:`numpy.random.SeedSequence` with ``master_seed`` as entropy and
the remaining integers as ``spawn_key``.  Per-bit work uses paths such as
``(master, STREAM, bit_index)`` so results do not depend on the order in
which bits are processed or on how many workers process them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar, Union

import numpy as np

Seed = Union[int, Sequence[int]]

T = TypeVar("T")
R = TypeVar("R")


def seed_path(seed: Seed) -> tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        path = (int(seed),)
    else:
        path = tuple(int(s) for s in seed)
    if not path:
        raise ValueError("seed path must not be empty")
    if any(s < 0 for s in path):
        raise ValueError(f"seed components must be non-negative, got {path}")
    return path


def derive(seed: Seed, *key: int) -> tuple[int, ...]:
    """Extend a seed path by ``key``."""
    return seed_path(seed) + tuple(int(k) for k in key)


def rng(seed: Seed) -> np.random.Generator:
    path = seed_path(seed)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(path[0], spawn_key=path[1:])))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> list[R]:
    """Ordered map, optionally over a thread pool.  Output order matches input."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunks(n: int, size: int) -> list[tuple[int, int, int]]:
    """Split ``range(n)`` into ``(chunk_index, start, stop)`` blocks of fixed size."""
    return [(i, start, min(start + size, n)) for i, start in enumerate(range(0, n, size))]
