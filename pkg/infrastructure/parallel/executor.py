from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

from settings.settings import settings

T = TypeVar("T")
R = TypeVar("R")


def thread_pool(threads: Optional[int] = None) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=threads or settings.runtime.threads)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Results come back in input order whatever the thread count.
    """
    items = list(items)
    threads = threads or settings.runtime.threads
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with thread_pool(threads) as pool:
        return list(pool.map(fn, items))


def chunk_slices(count: int, threads: Optional[int] = None) -> Sequence[slice]:
    """
    Splits range(count) into at most `threads` contiguous slices.
    """
    threads = threads or settings.runtime.threads
    bounds = np.linspace(0, count, min(max(threads, 1), max(count, 1)) + 1).astype(int)
    return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
