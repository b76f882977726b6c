"""Seedable multivariate normal sampling with a reproducible chunk contract.

Sample streams are cut into chunks of ``chunk_size`` draws. Chunk ``k`` is
produced by its own Philox generator keyed by ``SeedSequence(seed,
spawn_key=(k,))``, so its content depends on ``(seed, chunk_size, k)`` only.
Worker threads own whole chunks and results are merged in chunk order; the
thread count changes wall-clock time and nothing else.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from concurrent.futures import ThreadPoolExecutor
import logging

import numpy as np

from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import ValidationError


logger = logging.getLogger(__name__)

MAX_SEED = 2 ** 64 - 1


class SamplerConfig(object):
    """Seed, chunk size and requested thread count of a sampling run."""

    def __init__(self, seed=0, chunk_size=4096, threads=1):
        seed = int(seed)
        if not 0 <= seed <= MAX_SEED:
            raise ValidationError('seed must be a 64-bit unsigned integer')
        if int(chunk_size) < 1:
            raise ValidationError('chunk_size must be at least 1')
        if int(threads) < 1:
            raise ValidationError('threads must be at least 1')

        self.seed = seed
        self.chunk_size = int(chunk_size)
        self.threads = int(threads)

    @classmethod
    def from_config(cls, seed=None, chunk_size=None, threads=None):
        """Fill unset values from the ``[sampler]`` config section."""
        if seed is None:
            seed = get_config_int('sampler', 'SEED', 0)
        if chunk_size is None:
            chunk_size = get_config_int('sampler', 'CHUNK_SIZE', 4096)
        if threads is None:
            threads = get_config_int('sampler', 'THREADS', 1)
        return cls(seed, chunk_size, threads)

    def __repr__(self):
        return 'SamplerConfig(seed={}, chunk_size={}, threads={})'.format(
            self.seed, self.chunk_size, self.threads)


def chunk_generator(config, chunk_index):
    """Return the generator owning chunk ``chunk_index``."""
    seq = np.random.SeedSequence(config.seed, spawn_key=(chunk_index,))
    return np.random.Generator(np.random.Philox(seq))


def chunk_bounds(config, count):
    """Yield ``(chunk_index, start, rows)`` covering ``count`` draws."""
    for k, start in enumerate(range(0, count, config.chunk_size)):
        yield k, start, min(config.chunk_size, count - start)


def map_chunks(config, count, work):
    """Run ``work(rng, start, rows)`` over every chunk, in chunk order.

    Returns:
        list: one result per chunk, ordered by chunk index whatever the
        number of threads.
    """
    bounds = list(chunk_bounds(config, count))

    def run(bound):
        k, start, rows = bound
        return work(chunk_generator(config, k), start, rows)

    if config.threads == 1 or len(bounds) < 2:
        return [run(b) for b in bounds]

    logger.debug('Sampling {} chunks on {} threads'.format(
        len(bounds), config.threads))
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        return list(pool.map(run, bounds))


def standard_normals(config, count):
    """Return ``count`` standard normal variates as a 1-d array."""
    parts = map_chunks(
        config, count, lambda rng, start, rows: rng.standard_normal(rows))
    if not parts:
        return np.zeros(0)
    return np.concatenate(parts)


def is_diagonal(a):
    array = a.array
    return not np.any(array - np.diag(np.diag(array)))


class MvnSampler(object):
    """Draws ``X = L z`` from the covariance of a Gaussian embedding.

    Args:
        embedding (GaussianEmbedding)
        config (SamplerConfig)
        fast_path (bool): use the O(M) per-sample path when the embedded
            matrix is diagonal.
    """

    def __init__(self, embedding, config, fast_path=True):
        self.embedding = embedding
        self.config = config
        self.dimension = embedding.dimension
        self.structure = 'dense'
        if fast_path and is_diagonal(embedding.source):
            self.structure = 'diagonal'

        chol = embedding.chol.array
        m = embedding.m
        self._chol_t = np.ascontiguousarray(chol.T)
        # for a diagonal A the only non-zeros of L are L[i, i],
        # L[M+i, i] and L[M+i, M+i]
        idx = np.arange(m)
        self._top = chol[idx, idx].copy()
        self._cross = chol[m + idx, idx].copy()
        self._bottom = chol[m + idx, m + idx].copy()

        logger.debug('MvnSampler dimension={} structure={}'.format(
            self.dimension, self.structure))

    def draw(self, rng, rows):
        """Draw ``rows`` field vectors from ``rng`` as a (rows, 2M) array."""
        z = rng.standard_normal((rows, self.dimension))
        if self.structure == 'diagonal':
            m = self.embedding.m
            out = np.empty_like(z)
            out[:, :m] = z[:, :m] * self._top
            out[:, m:] = z[:, :m] * self._cross + z[:, m:] * self._bottom
            return out

        return z.dot(self._chol_t)

    def map_samples(self, count, work):
        """Run ``work(samples, start)`` on each chunk of ``count`` draws."""
        return map_chunks(
            self.config, count,
            lambda rng, start, rows: work(self.draw(rng, rows), start))


def sample_field(sampler, count):
    """Return ``count`` samples of the field as a (count, 2M) array."""
    parts = sampler.map_samples(count, lambda samples, start: samples)
    if not parts:
        return np.zeros((0, sampler.dimension))
    return np.concatenate(parts)
