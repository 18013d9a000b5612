"""Thread-count resolution and order-stable parallel mapping.

Work is split per sample index with per-index derived seeds, so results
are identical for any worker count; aggregation happens in index order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "LEGLAB_THREADS"


def resolve_threads(explicit=None) -> int:
    if explicit is not None:
        return max(1, int(explicit))
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def parallel_map(fn, items, threads: int = 1) -> list:
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
