"""Deterministic block-parallel map.

Work is cut into fixed-size blocks that do not depend on the number of
threads, so every block sees identical inputs and produces identical bits
whatever the scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def resolve_threads(threads: int | None) -> int:
    if threads is None:
        return max(1, os.cpu_count() or 1)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return int(threads)


def map_blocks(
    func: Callable[[int, int], T], n: int, threads: int | None = None, block: int = 8
) -> list[T]:
    """Return ``[func(start, stop) for each block]`` in block order."""
    bounds = [(s, min(s + block, n)) for s in range(0, n, block)]
    workers = min(resolve_threads(threads), len(bounds)) if bounds else 1
    if workers <= 1:
        return [func(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda ab: func(*ab), bounds))
