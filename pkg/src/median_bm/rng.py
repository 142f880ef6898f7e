"""Counter-based random streams and a scheduling-independent block runner.

Every replication block draws from its own Philox stream keyed by
``(seed, purpose, block index)``. Workers only decide *when* a block is
computed, never *what* it contains, so results are bit-identical for any
worker count.
"""
from __future__ import annotations

import os
import secrets
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

WORKERS_ENV = "MEDIAN_BM_WORKERS"

# stream purposes; distinct values keep unrelated draws independent
PATHS = 1
JUMPS = 2
COMPONENTWISE = 3
SCALING_A = 4
SCALING_B = 5
LIMIT = 6
WALK = 7
HOLDER = 8


def substream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))
    )


def derive_seed(seed: int, *key: int) -> int:
    """A 63-bit child seed, independent of ``seed``'s other streams."""
    state = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)).generate_state(1, np.uint64)
    return int(state[0] >> np.uint64(1))


def fresh_seed() -> int:
    return secrets.randbits(63)


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def block_sizes(reps: int, block: int) -> list[int]:
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    full, rest = divmod(reps, block)
    return [block] * full + ([rest] if rest else [])


def run_blocks(fn: Callable[[int, int], T], sizes: Sequence[int],
               workers: int | None = None) -> list[T]:
    """Evaluate ``fn(block_index, block_size)`` for every block, in order."""
    workers = default_workers() if workers is None else max(1, int(workers))
    jobs = list(enumerate(sizes))
    if workers == 1 or len(jobs) == 1:
        return [fn(i, b) for i, b in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))
