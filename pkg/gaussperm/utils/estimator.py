"""Monte Carlo estimation of permanents and the matching error bounds.

The Gaussian-field estimator draws N samples X from the embedding covariance
C = B + alpha I and returns the mean of the coordinate products

    mu_k = X_1 ... X_2M,

which is unbiased for perm(A). Every coordinate has variance alpha, so the
fourth moments are 3 alpha^2 and the per-sample variance is at most
3^M alpha^2M. Chebyshev turns that into

    P(|S_N - perm(A)| > t) <= 3^M alpha^2M / (t^2 N).

The Glynn estimator is kept as the randomized baseline.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from collections import namedtuple
from itertools import product
import logging
import math
import time

import numpy as np

from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import ConsistencyError
from gaussperm.utils.errors import InvalidInputError
from gaussperm.utils.errors import ProductOverflowError
from gaussperm.utils.errors import SizeLimitError
from gaussperm.utils.errors import ValidationError
from gaussperm.utils.matrix import as_matrix
from gaussperm.utils.matrix import build_embedding
from gaussperm.utils.matrix import frobenius_norm
from gaussperm.utils.oracles import permanent_naive
from gaussperm.utils.oracles import size_limit
from gaussperm.utils.oracles import GLYNN_ENUM
from gaussperm.utils.sampler import MvnSampler
from gaussperm.utils.sampler import SamplerConfig
from gaussperm.utils.sampler import map_chunks
from gaussperm.utils.wick import CovarianceModel
from gaussperm.utils.wick import isserlis_expectation


logger = logging.getLogger(__name__)

GAUSSIAN_FIELD = 'gaussian-field'
GLYNN_RANDOM = 'glynn-random'

LOG3 = math.log(3.0)


class EstimateReport(namedtuple('EstimateReport', [
        'estimate', 'n_samples', 'alpha', 'm', 'variance_bound',
        'chebyshev_bound', 'empirical_variance', 'seed', 'wall_ns_setup',
        'wall_ns_sampling', 'method', 'product_ops', 'jitter_applied'])):
    """Outcome of one estimation run.

    ``chebyshev_bound`` is None or a ``{'t': ..., 'bound': ...}`` dict.
    ``product_ops`` counts the multiplications spent forming the sample
    products.
    """
    __slots__ = ()

    def to_dict(self):
        return dict(self._asdict())


MagnitudeReport = namedtuple('MagnitudeReport', [
    'n_samples', 'm', 'alpha', 'mean_log_abs', 'max_log_abs',
    'positive_fraction', 'seed'])


class BoundQuery(object):
    """Inputs of the Chebyshev failure bound."""

    def __init__(self, m, alpha, t, n, c=None):
        if t <= 0:
            raise ValidationError('t must be positive')
        if n < 1:
            raise ValidationError('n must be at least 1')
        if alpha <= 0:
            raise ValidationError('alpha must be positive')
        if m < 0:
            raise ValidationError('m must be non-negative')
        self.m = int(m)
        self.alpha = float(alpha)
        self.t = float(t)
        self.n = int(n)
        self.c = c


def log_variance_bound(m, alpha):
    """Return ``(log 3^m alpha^2m, sign)``; the log is -inf when alpha is 0."""
    if alpha < 0:
        raise ValidationError('alpha must be non-negative')
    if m == 0:
        return 0.0, 1
    if alpha == 0:
        return float('-inf'), 1
    return m * LOG3 + 2 * m * math.log(alpha), 1


def _exp(value):
    try:
        return math.exp(value)
    except OverflowError:
        return float('inf')


def variance_bound(m, alpha):
    """Return ``3^m alpha^2m``, the bound on the variance of one sample."""
    log_value, sign = log_variance_bound(m, alpha)
    return sign * _exp(log_value)


def chebyshev_failure_bound(q):
    """Return ``min(1, 3^m alpha^2m / (t^2 n))`` for a BoundQuery."""
    log_value, _ = log_variance_bound(q.m, q.alpha)
    return min(1.0, _exp(log_value - 2 * math.log(q.t) - math.log(q.n)))


def glynn_failure_bound(m, norm, t, n):
    """Chebyshev bound of the Glynn estimator, ``norm^2m / (t^2 n)``.

    ``norm`` must bound the operator norm of A; then |Gly_x(A)| <= norm^m.
    """
    if t <= 0 or n < 1 or norm < 0:
        raise ValidationError('Need t > 0, n >= 1 and norm >= 0')
    if m == 0:
        return min(1.0, 1.0 / (t * t * n))
    if norm == 0:
        return 0.0
    log_value = 2 * m * math.log(norm) - 2 * math.log(t) - math.log(n)
    return min(1.0, _exp(log_value))


def glynn_variance_bound(m, norm):
    """Return ``norm^2m``, the Glynn per-sample variance bound."""
    if m == 0:
        return 1.0
    if norm == 0:
        return 0.0
    return _exp(2 * m * math.log(norm))


def error_scale(m, alpha, c=1.0):
    """Return the additive error ``c (sqrt(3) alpha)^m``."""
    if m == 0:
        return c
    if alpha == 0:
        return 0.0
    return c * _exp(m * (0.5 * LOG3 + math.log(alpha)))


def glynn_error_scale(m, norm, c=1.0):
    """Return the Glynn additive error ``c norm^m``."""
    return c * math.sqrt(glynn_variance_bound(m, norm))


def required_samples(m, alpha, c, delta):
    """Samples needed for error ``c (sqrt(3) alpha)^m`` with probability
    at least ``1 - delta``: ``ceil(1 / (c^2 delta))``.
    """
    if c <= 0:
        raise ValidationError('c must be positive')
    if not 0 < delta < 1:
        raise ValidationError('delta must lie in (0, 1)')

    n = 1.0 / (c * c * delta)
    nearest = round(n)
    # absorb rounding in c^2 delta, e.g. 0.1^2 * 0.01
    if abs(n - nearest) <= 1e-9:
        count = int(nearest)
    else:
        count = int(math.ceil(n))
    count = max(1, count)

    logger.debug('required_samples: N={} for t={!r}'.format(
        count, error_scale(m, alpha, c)))
    return count


def _merge(stats):
    """Merge per-chunk ``(count, mean, m2)`` triples in order."""
    count, mean, m2 = 0, 0.0, 0.0
    for n_b, mean_b, m2_b in stats:
        if n_b == 0:
            continue
        total = count + n_b
        delta = mean_b - mean
        mean += delta * n_b / total
        m2 += m2_b + delta * delta * count * n_b / total
        count = total
    return count, mean, m2


def _chunk_stats(values):
    mean = float(np.mean(values))
    m2 = float(np.sum((values - mean) ** 2))
    return len(values), mean, m2


def coordinate_products(samples):
    """Return the row products of ``samples`` and the multiplication count.

    Each row costs exactly ``2M - 1`` multiplications.
    """
    rows, width = samples.shape
    mu = samples[:, 0].copy()
    for j in range(1, width):
        mu *= samples[:, j]
    return mu, rows * (width - 1)


def _empty_report(alpha, config, method, t):
    bound = None
    if t is not None:
        bound = {'t': t, 'bound': 0.0}
    return EstimateReport(
        estimate=1.0, n_samples=0, alpha=alpha, m=0, variance_bound=1.0,
        chebyshev_bound=bound, empirical_variance=0.0, seed=config.seed,
        wall_ns_setup=0, wall_ns_sampling=0, method=method, product_ops=0,
        jitter_applied=0.0)


def _check_square(a):
    a = as_matrix(a)
    if not a.is_square:
        raise InvalidInputError(
            'Matrix must be square, got {}x{}'.format(a.rows, a.cols))
    return a


def estimate_permanent(a, n, config=None, alpha=None, unsafe_alpha=False,
                       t=None, fast_path=True):
    """Estimate perm(A) from N draws of the Gaussian embedding.

    Args:
        a (DenseMatrix): square matrix.
        n (int): number of samples.
        config (SamplerConfig): defaults to the configured sampler.
        alpha (float): diagonal shift, Frobenius norm by default.
        unsafe_alpha (bool): allow alpha below the Frobenius norm.
        t (float): when given, the report carries the Chebyshev bound at t.
        fast_path (bool): allow the O(M) sampler for diagonal matrices.

    Returns:
        EstimateReport

    Raises:
        ValidationError, NumericalError, ProductOverflowError
    """
    a = _check_square(a)
    if config is None:
        config = SamplerConfig.from_config()
    if n < 1:
        raise ValidationError('n must be at least 1')

    m = a.rows
    if m == 0:
        return _empty_report(alpha or 0.0, config, GAUSSIAN_FIELD, t)

    start = time.perf_counter()
    embedding = build_embedding(a, alpha, unsafe_alpha=unsafe_alpha)
    sampler = MvnSampler(embedding, config, fast_path=fast_path)
    setup_ns = int((time.perf_counter() - start) * 1e9)

    def work(samples, offset):
        mu, ops = coordinate_products(samples)
        bad = np.flatnonzero(~np.isfinite(mu))
        if bad.size:
            raise ProductOverflowError(offset + int(bad[0]))
        return _chunk_stats(mu) + (ops,)

    start = time.perf_counter()
    chunks = sampler.map_samples(n, work)
    sampling_ns = int((time.perf_counter() - start) * 1e9)

    count, mean, m2 = _merge(c[:3] for c in chunks)
    ops = sum(c[3] for c in chunks)

    alpha_eff = embedding.alpha_effective
    bound_value = variance_bound(m, alpha_eff)
    bound = None
    if t is not None:
        # a zero variance bound means every sample equals perm(A)
        if bound_value == 0:
            bound = {'t': t, 'bound': 0.0}
        else:
            query = BoundQuery(m, alpha_eff, t, n)
            bound = {'t': t, 'bound': chebyshev_failure_bound(query)}

    report = EstimateReport(
        estimate=mean,
        n_samples=count,
        alpha=embedding.alpha,
        m=m,
        variance_bound=bound_value,
        chebyshev_bound=bound,
        empirical_variance=m2 / (count - 1) if count > 1 else 0.0,
        seed=config.seed,
        wall_ns_setup=setup_ns,
        wall_ns_sampling=sampling_ns,
        method=GAUSSIAN_FIELD,
        product_ops=ops,
        jitter_applied=embedding.jitter_applied,
    )
    logger.info('Estimate {!r} from {} samples'.format(mean, count))
    return report


def glynn_values(a, signs):
    """Return ``Gly_x(A)`` for every row ``x`` of ``signs``."""
    return np.prod(signs, axis=1) * np.prod(signs.dot(a.array), axis=1)


def glynn_estimate(a, n, config=None, exhaustive=False, t=None):
    """Estimate perm(A) with the Glynn estimator on random sign vectors.

    Args:
        exhaustive (bool): average over all 2^M sign vectors instead of
            sampling; ``n`` is ignored.

    Returns:
        EstimateReport: ``alpha`` holds the Frobenius norm and
        ``variance_bound`` its 2M-th power.
    """
    a = _check_square(a)
    if config is None:
        config = SamplerConfig.from_config()
    if n < 1 and not exhaustive:
        raise ValidationError('n must be at least 1')

    m = a.rows
    if m == 0:
        return _empty_report(0.0, config, GLYNN_RANDOM, t)

    start = time.perf_counter()
    norm = frobenius_norm(a)
    setup_ns = int((time.perf_counter() - start) * 1e9)

    def finite_stats(signs, offset):
        values = glynn_values(a, signs)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise ProductOverflowError(offset + int(bad[0]))
        return _chunk_stats(values)

    start = time.perf_counter()
    if exhaustive:
        limit = size_limit(GLYNN_ENUM)
        if m > limit:
            raise SizeLimitError(
                'Exhaustive Glynn limited to M <= {}'.format(limit))
        signs = np.array(list(product((1.0, -1.0), repeat=m)))
        chunks = [finite_stats(signs, 0)]
    else:
        def work(rng, offset, rows):
            signs = 2.0 * rng.integers(0, 2, size=(rows, m)) - 1.0
            return finite_stats(signs, offset)

        chunks = map_chunks(config, n, work)
    sampling_ns = int((time.perf_counter() - start) * 1e9)

    count, mean, m2 = _merge(chunks)

    bound_value = glynn_variance_bound(m, norm)
    bound = None
    if t is not None:
        if bound_value == 0:
            bound = {'t': t, 'bound': 0.0}
        else:
            bound = {'t': t, 'bound': glynn_failure_bound(m, norm, t, count)}

    return EstimateReport(
        estimate=mean,
        n_samples=count,
        alpha=norm,
        m=m,
        variance_bound=bound_value,
        chebyshev_bound=bound,
        empirical_variance=m2 / (count - 1) if count > 1 else 0.0,
        seed=config.seed,
        wall_ns_setup=setup_ns,
        wall_ns_sampling=sampling_ns,
        method=GLYNN_RANDOM,
        product_ops=count * 2 * m * m,
        jitter_applied=0.0,
    )


def product_magnitude_stats(a, n, config=None, alpha=None,
                            unsafe_alpha=False):
    """Accumulate log|mu_k| and the sign of each sample product.

    The mean of the products cannot be recovered from these statistics, so
    only magnitudes and the positive fraction are reported.
    """
    a = _check_square(a)
    if config is None:
        config = SamplerConfig.from_config()
    if n < 1:
        raise ValidationError('n must be at least 1')

    embedding = build_embedding(a, alpha, unsafe_alpha=unsafe_alpha)
    sampler = MvnSampler(embedding, config)

    def work(samples, offset):
        with np.errstate(divide='ignore'):
            logs = np.sum(np.log(np.abs(samples)), axis=1)
        negatives = np.sum(samples < 0, axis=1)
        return (len(logs), float(np.sum(logs)), float(np.max(logs)),
                int(np.sum(negatives % 2 == 0)))

    chunks = sampler.map_samples(n, work)
    count = sum(c[0] for c in chunks)
    return MagnitudeReport(
        n_samples=count,
        m=a.rows,
        alpha=embedding.alpha,
        mean_log_abs=sum(c[1] for c in chunks) / count if count else 0.0,
        max_log_abs=max(c[2] for c in chunks) if chunks else 0.0,
        positive_fraction=sum(c[3] for c in chunks) / count if count else 1.0,
        seed=config.seed,
    )


def exact_single_sample_variance(a, alpha=None, unsafe_alpha=False):
    """Exact variance of one sample product, by Isserlis on 4M legs.

    Returns ``<(X_1 ... X_2M)^2> - perm(A)^2``.

    Raises:
        SizeLimitError: M above ``[wick] VARIANCE_MAX_M`` (3).
        ConsistencyError: the variance exceeds ``3^M alpha^2M``.
    """
    a = _check_square(a)
    limit = get_config_int('wick', 'VARIANCE_MAX_M', 3)
    if a.rows > limit:
        raise SizeLimitError(
            'Exact sample variance limited to M <= {}'.format(limit))

    embedding = build_embedding(a, alpha, unsafe_alpha=unsafe_alpha)
    model = CovarianceModel.from_embedding(embedding)
    legs = [i for i in range(embedding.dimension) for _ in range(2)]
    second_moment = isserlis_expectation(model, legs).value
    perm = permanent_naive(a).value
    result = second_moment - perm * perm

    bound = variance_bound(a.rows, embedding.alpha_effective)
    if result > bound + 1e-9 * max(1.0, bound):
        raise ConsistencyError(
            'Sample variance {!r} exceeds the bound {!r}'.format(
                result, bound))
    return result
