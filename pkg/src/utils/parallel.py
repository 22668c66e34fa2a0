"""Coil-parallel execution.

Every task returns its own array; callers reduce the results in coil order,
so outputs do not depend on the number of workers.
"""
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def resolve_threads(threads: int = 0) -> int:
    """Worker count; 0 or negative means all available cores."""
    if threads and threads > 0:
        return int(threads)
    return os.cpu_count() or 1


def map_coils(fn: Callable[[T], R], items: Iterable[T], threads: int = 0) -> List[R]:
    """Apply fn to every item, in order, on up to ``threads`` workers."""
    items = list(items)
    workers = min(resolve_threads(threads), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
