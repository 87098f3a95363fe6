"""
Thread pool helper for per-index and per-trial work.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional, TypeVar

from config import config

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> list[R]:
    """
    Apply fn to every item, possibly in parallel, and return results in input order.

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Worker cap (defaults to config.THREADS, i.e. LIFTKIT_THREADS)

    Returns:
        List of results aligned with items
    """
    work = list(items)
    workers = min(threads or config.THREADS, len(work))
    if workers <= 1:
        return [fn(item) for item in work]

    logger.debug(f"Running {len(work)} items on {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves order; the first exception is re-raised here
        return list(pool.map(fn, work))
