"""Order-preserving thread pool map.

The compiled recursions release the GIL, so threads give real parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "ELASTICAVG_THREADS"

_default: int | None = None


def set_default_threads(n: int | None) -> None:
    global _default
    _default = n


def default_threads() -> int:
    if _default is not None:
        return max(1, _default)
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def pmap(fn, items, threads: int | None = None) -> list:
    items = list(items)
    n = default_threads() if threads is None else max(1, threads)
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as ex:
        return list(ex.map(fn, items))
