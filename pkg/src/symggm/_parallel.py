"""Order-preserving map over a process pool."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np


def resolve_workers(workers: int | None) -> int:
    """``None`` or ``0`` means all available CPUs."""
    if workers is None or workers == 0:
        return max(1, os.cpu_count() or 1)
    if workers < 0:
        raise ValueError(f"workers must be nonnegative, got {workers}")
    return int(workers)


def parallel_map(fn, items, workers: int | None = 1) -> list:
    """``[fn(x) for x in items]``, optionally spread over processes.

    Results come back in input order, so anything accumulated from them is
    independent of the worker count.  ``fn`` must be picklable.
    """
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * n))))


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replicate ``index`` under master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))
