"""
Worker pool over shards.

Shard producers are pure; results come back in shard order and the caller
merges them with a canonical sort, so nothing depends on the worker count.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Sequence, TypeVar

import numpy as np

import config

log = logging.getLogger(__name__)

S = TypeVar("S")
R = TypeVar("R")


def resolve_workers(workers=None) -> int:
    if workers is None:
        workers = config.WORKERS
    return max(1, int(workers))


def map_shards(fn: Callable[[S], R], shards: Iterable[S], workers=None) -> List[R]:
    shards = list(shards)
    workers = resolve_workers(workers)
    if workers == 1 or len(shards) <= 1:
        return [fn(s) for s in shards]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, shards))


def split_range(lo: int, hi: int, count: int) -> List[range]:
    """Split [lo, hi] into at most ``count`` contiguous integer ranges."""
    if hi < lo:
        return []
    count = max(1, min(count, hi - lo + 1))
    edges = np.linspace(lo, hi + 1, count + 1).round().astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def chunk(items: Sequence[S], count: int) -> List[Sequence[S]]:
    count = max(1, min(count, len(items)))
    size = -(-len(items) // count)
    return [items[i:i + size] for i in range(0, len(items), size)]
