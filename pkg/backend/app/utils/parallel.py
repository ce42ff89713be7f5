"""
Ordered fan-out over a thread pool.

Results always come back in input order, so reductions done by the caller
are independent of the worker count.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from app.config import settings

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: Optional[int] = None) -> int:
    return max(1, threads if threads is not None else settings.THREADS)


def ordered_map(fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item, in parallel when threads > 1.

    Args:
        fn: Pure function of one item
        items: Work items
        threads: Worker count (defaults to settings.THREADS)

    Returns:
        [fn(item) for item in items], in the same order
    """
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]
