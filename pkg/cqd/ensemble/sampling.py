"""
Reproducible Monte Carlo sampling of co-quantum directions.

Every experiment draws from counter-based Philox streams keyed by
(seed, experiment id, chunk index). Chunks hold ``CHUNK_SIZE`` draws, so a
result depends only on the seed and the sample count, never on how many
workers reduce the chunks.
"""

import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import structlog

from ..errors import DomainError
from ..metrics import metrics_collector
from ..models import MCEstimate
from .distributions import AngularDistribution

logger = structlog.get_logger(__name__)

CHUNK_SIZE = 2 ** 16
MIN_SAMPLES = 1000


def experiment_id(name: str) -> int:
    """Stable integer id of an experiment name."""
    return zlib.crc32(name.encode("utf-8"))


@dataclass(frozen=True)
class StreamLayout:
    """Stream addressing of one experiment: Philox keyed by (seed, experiment id, chunk)."""
    seed: int
    experiment: str
    chunk_size: int = CHUNK_SIZE

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise DomainError("seed must be an unsigned 64-bit integer", {"seed": self.seed})

    def generator(self, chunk: int) -> np.random.Generator:
        sequence = np.random.SeedSequence(entropy=self.seed,
                                          spawn_key=(experiment_id(self.experiment), chunk))
        return np.random.Generator(np.random.Philox(sequence))

    def chunk_sizes(self, n: int) -> List[int]:
        sizes = [self.chunk_size] * (n // self.chunk_size)
        if n % self.chunk_size:
            sizes.append(n % self.chunk_size)
        return sizes


def make_generator(seed: int, experiment: str, chunk: int = 0) -> np.random.Generator:
    """Independent generator for one chunk of one experiment."""
    return StreamLayout(seed, experiment).generator(chunk)


def sample(dist: AngularDistribution, rng: np.random.Generator,
           size: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Draw (theta, phi) by inverse-transform sampling of the polar CDF."""
    theta = np.asarray(dist.inverse_cdf(rng.random(size)), dtype=float)
    phi = 2.0 * math.pi * rng.random(size)
    return theta, phi


def chunked_sum(n: int, seed: int, experiment: str,
                chunk_fn: Callable[[np.random.Generator, int], np.ndarray],
                workers: int = 1) -> np.ndarray:
    """
    Sum ``chunk_fn(rng, size)`` over the chunks of an ``n``-sample run.

    ``chunk_fn`` returns an array of partial sums (for example a count and a
    sum of squares); the partial sums of all chunks are added in chunk order.
    """
    if n <= 0:
        raise DomainError("sample count must be positive", {"n": n})
    layout = StreamLayout(seed, experiment)
    sizes = layout.chunk_sizes(n)

    def run(index: int) -> np.ndarray:
        return np.asarray(chunk_fn(layout.generator(index), sizes[index]),
                          dtype=float)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, range(len(sizes))))
    else:
        partials = [run(index) for index in range(len(sizes))]

    metrics_collector.record_mc_samples(experiment, n)
    logger.debug("Monte Carlo run completed", experiment=experiment, n=n, chunks=len(sizes),
                 workers=workers)
    return np.sum(partials, axis=0)


def bernoulli_estimate(successes: float, n: int, analytic: Optional[float] = None) -> MCEstimate:
    p = successes / n
    return MCEstimate(estimate=p, stderr=math.sqrt(max(p * (1.0 - p), 0.0) / n), n=n,
                      analytic=analytic)


def flip_probability(theta_e: float, dist: AngularDistribution) -> float:
    """Probability that the electron collapses to -z: P(theta_n < theta_e)."""
    return float(dist.cdf(theta_e))


def flip_probability_mc(theta_e: float, dist: AngularDistribution, n_samples: int,
                        seed: int = 0, workers: int = 1) -> MCEstimate:
    """
    Monte Carlo estimate of the flip probability at a fixed electron angle.

    Raises:
        DomainError: for fewer than 1000 samples or theta_e outside [0, pi]
    """
    if n_samples < MIN_SAMPLES:
        raise DomainError("at least 1000 samples are required", {"n_samples": n_samples})
    if not 0.0 <= theta_e <= math.pi:
        raise DomainError("theta_e must lie in [0, pi]", {"theta_e": theta_e})

    def chunk(rng, size):
        theta_n, _ = sample(dist, rng, size)
        return [np.count_nonzero(theta_n < theta_e)]

    (count,) = chunked_sum(n_samples, seed, f"flip_probability:{dist.kind.value}", chunk, workers)
    return bernoulli_estimate(count, n_samples, flip_probability(theta_e, dist))


def mean_theta_mc(dist: AngularDistribution, n_samples: int, seed: int = 0) -> MCEstimate:
    """Sample mean of the polar angle with its standard error."""
    if n_samples < MIN_SAMPLES:
        raise DomainError("at least 1000 samples are required", {"n_samples": n_samples})

    def chunk(rng, size):
        theta, _ = sample(dist, rng, size)
        return [theta.sum(), np.square(theta).sum()]

    total, squares = chunked_sum(n_samples, seed, f"mean_theta:{dist.kind.value}", chunk)
    mean = total / n_samples
    variance = max(squares / n_samples - mean * mean, 0.0)
    return MCEstimate(estimate=mean, stderr=math.sqrt(variance / n_samples), n=n_samples,
                      analytic=dist.mean_theta())
