"""Seed derivation and the bounded worker pool used by every multi-run operation.

Per-run seeds come from :class:`numpy.random.SeedSequence` with the master
seed as entropy and a tuple of integer keys as ``spawn_key``. A run's seed
therefore depends only on (master, keys), never on scheduling order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

# stream identifiers, the first spawn-key component
STREAM_CONSISTENCY = 1
STREAM_KERNEL = 2
STREAM_GENERALIZATION = 3
STREAM_TRAIN = 4
STREAM_TEST = 5
STREAM_SWEEP = 6
STREAM_TRANSIENTS = 7


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic 63-bit seed for the run identified by ``keys``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def pool_map(fn: Callable[[T], R], tasks: Sequence[T] | Iterable[T], workers: int = 1) -> list[R]:
    """``[fn(t) for t in tasks]`` on up to ``workers`` processes, in task order."""
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=chunk))
