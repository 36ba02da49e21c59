"""Seeded, chunked execution of Monte Carlo replicas."""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Optional

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import ValidationError
from app.core.logging import get_logger

logger = get_logger(__name__)

# chunk_fn(count, rng) -> additive statistics of ``count`` replicas
ChunkFn = Callable[[int, np.random.Generator], np.ndarray]


def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Generator for chunk ``chunk`` of a run with master seed ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk,)))


def derived_seed(seed: int, *keys: int) -> int:
    """Master seed of an independent sub-run, e.g. one depth of a sweep."""
    state = np.random.SeedSequence(seed, spawn_key=keys).generate_state(1, np.uint64)
    return int(state[0])


def _run_chunk(args) -> np.ndarray:
    chunk_fn, count, seed, chunk = args
    return np.asarray(chunk_fn(count, chunk_rng(seed, chunk)), dtype=float)


class ReplicaRunner:
    """Splits N replicas into seeded chunks and sums their statistics in chunk order."""

    def __init__(self, chunk_size: Optional[int] = None, workers: Optional[int] = None):
        settings = get_settings()
        self.chunk_size = chunk_size or settings.CHUNK_SIZE
        self.workers = workers or settings.WORKERS

    def chunk_size_for(self, floats_per_replica: int) -> int:
        """Chunk size capped so one chunk holds at most MAX_BATCH_FLOATS floats."""
        budget = get_settings().MAX_BATCH_FLOATS
        return max(1, min(self.chunk_size, budget // max(floats_per_replica, 1)))

    def run(
        self,
        chunk_fn: ChunkFn,
        n: int,
        seed: int,
        chunk_size: Optional[int] = None,
    ) -> np.ndarray:
        """Total statistics of n replicas.

        Args:
            chunk_fn: Picklable function returning additive statistics for a chunk
            n: Number of replicas (>= 1)
            seed: Master seed
            chunk_size: Replicas per chunk (default: configured CHUNK_SIZE)

        Returns:
            Elementwise sum of the chunk statistics

        Raises:
            ValidationError: If n < 1
        """
        if n < 1:
            raise ValidationError("Replica count must be at least 1", details={"n": n})
        size = chunk_size or self.chunk_size
        counts: List[int] = [size] * (n // size)
        if n % size:
            counts.append(n % size)
        jobs = [(chunk_fn, count, seed, k) for k, count in enumerate(counts)]

        if self.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.workers) as pool:
                results = list(pool.map(_run_chunk, jobs))
        else:
            results = [_run_chunk(job) for job in jobs]

        total = np.zeros_like(results[0])
        for result in results:
            total = total + result

        logger.debug("Replicas merged", n=n, chunks=len(jobs), workers=self.workers, seed=seed)
        return total
