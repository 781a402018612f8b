"""Sharded map/reduce over records on a thread pool.

The compiled kernels release the GIL, so threads give real parallelism.
Shards are contiguous index ranges; partial results are reduced in ascending
shard order, which makes every sum reproducible for a fixed shard count.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import kernels
from .core import DualState, Selection, _check_dims, selection_from_partials
from .problem import GeneralProblem

SHARDS_ENV = "RP_SHARDS"


@dataclass(frozen=True)
class ShardPlan:
    shard_count: int
    ranges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return self.ranges[-1][1]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(stop - start for start, stop in self.ranges)


def plan(n: int, shards: int) -> ShardPlan:
    """Balanced contiguous split of ``[0, n)``; ``shards > n`` is clamped to ``n``."""
    if n < 1 or shards < 1:
        raise ValueError(f"need n >= 1 and shards >= 1, got n={n}, shards={shards}")
    shards = min(shards, n)
    base, extra = divmod(n, shards)
    ranges = []
    start = 0
    for s in range(shards):
        stop = start + base + (1 if s < extra else 0)
        ranges.append((start, stop))
        start = stop
    return ShardPlan(shards, tuple(ranges))


def default_shards() -> int:
    env = os.environ.get(SHARDS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@lru_cache(maxsize=None)
def _pool(workers: int) -> ThreadPoolExecutor:
    return ThreadPoolExecutor(max_workers=workers, thread_name_prefix="dynreserve")


def run_shards(fn: Callable[[int, int, int], object], shard_plan: ShardPlan, workers=None) -> list:
    """Call ``fn(shard_index, start, stop)`` for each shard; results in shard order."""
    workers = workers or shard_plan.shard_count
    if shard_plan.shard_count == 1 or workers == 1:
        return [fn(s, a, b) for s, (a, b) in enumerate(shard_plan.ranges)]
    pool = _pool(workers)
    futures = [pool.submit(fn, s, a, b) for s, (a, b) in enumerate(shard_plan.ranges)]
    return [f.result() for f in futures]


def reduce_tuples(fn: Callable[[int, int, np.ndarray], None], width: int,
                  shard_plan: ShardPlan, workers=None) -> np.ndarray:
    """Generic map step: ``fn(start, stop, out)`` fills a fixed-width numeric
    partial per shard; the partials are summed in ascending shard order."""
    partials = np.zeros((shard_plan.shard_count, width), dtype=np.float64)

    def work(s, start, stop):
        fn(start, stop, partials[s])

    run_shards(work, shard_plan, workers)
    total = np.zeros(width, dtype=np.float64)
    for s in range(shard_plan.shard_count):
        total += partials[s]
    return total


def map_reduce(problem: GeneralProblem, duals: DualState, shard_plan: ShardPlan,
               workers=None) -> Selection:
    """Sharded equivalent of :func:`dynreserve.core.evaluate`."""
    if shard_plan.n != problem.n:
        raise ValueError(f"shard plan covers {shard_plan.n} records, problem has {problem.n}")
    _check_dims(problem.n_constraints, duals)
    kern = kernels.get()
    x = np.empty(problem.n, dtype=np.uint8)
    lam = duals.lambdas

    def fn(start, stop, out):
        kern.evaluate_range(problem.c, problem.b, lam, start, stop, x, out)

    acc = reduce_tuples(fn, 3 + problem.n_constraints, shard_plan, workers)
    return selection_from_partials(problem, x, acc)
