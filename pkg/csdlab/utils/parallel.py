"""Ordered parallel map for independent experiment items."""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

THREADS_ENV = 'CSDLAB_THREADS'


def worker_count(requested: Optional[int] = None) -> int:
    """
    Number of worker threads to use.

    CSDLAB_THREADS caps the count; unset or invalid values mean one worker.
    """
    cap = 1
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            cap = max(1, int(raw))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
    if requested is None:
        return cap
    return max(1, min(int(requested), cap))


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply fn to every item; results keep the input order."""
    items = list(items)
    count = worker_count(workers)
    if count == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, items))
