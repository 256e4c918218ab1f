"""Order-preserving map over a process pool, sized by QSUPER_THREADS."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

ENV_THREADS = "QSUPER_THREADS"


def worker_count(requested: Optional[int] = None) -> int:
    n = requested if requested is not None else (os.cpu_count() or 1)
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            cap = int(env)
        except ValueError:
            raise ValueError(f"{ENV_THREADS} must be an integer, got {env!r}") from None
        if cap < 1:
            raise ValueError(f"{ENV_THREADS} must be at least 1")
        n = min(n, cap)
    return max(1, n)


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """``list(map(fn, items))``, possibly in parallel; results keep input order."""
    items = list(items)
    n = min(worker_count(workers), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * n))))
