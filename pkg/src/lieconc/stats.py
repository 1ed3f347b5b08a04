"""Binomial confidence intervals and chunked Monte Carlo over random streams."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import beta

from .sampling import RandomStream

CONFIDENCE = 0.99
CHUNK = 20_000
THREADS_ENV = "LIECONC_THREADS"


def clopper_pearson(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Exact (conservative) binomial interval."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    a = 1.0 - confidence
    k = int(successes)
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, trials - k + 1))
    hi = 1.0 if k == trials else float(beta.ppf(1 - a / 2, k + 1, trials - k))
    return lo, hi


def binomial_estimate(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Point estimate and halfwidth ``max(p - lo, hi - p)`` of the exact interval."""
    p = successes / trials
    lo, hi = clopper_pearson(successes, trials, confidence)
    return p, max(p - lo, hi - p)


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def chunked_draws(draw, total: int, rng: RandomStream, chunk: int = CHUNK, workers: int | None = None) -> np.ndarray:
    """Concatenate ``draw(size, generator)`` over fixed-size chunks.

    Chunk ``k`` always uses ``rng.substream(k)``, so the result does not depend
    on the number of worker threads.
    """
    sizes = [min(chunk, total - start) for start in range(0, total, chunk)]
    jobs = [(size, rng.substream(k)) for k, size in enumerate(sizes)]
    workers = default_workers() if workers is None else workers

    def run(job):
        size, stream = job
        return np.asarray(draw(size, stream.generator()))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    return np.concatenate(parts) if parts else np.empty(0)
