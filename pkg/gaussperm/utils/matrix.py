"""Dense real matrices and the Gaussian embedding of a square matrix.

The embedding of an M x M matrix A is the 2M x 2M covariance

    C = B + alpha * I,    B = [[0, A], [A^T, 0]]

which is positive semidefinite whenever alpha is at least the operator norm
of A. The Frobenius norm bounds the operator norm from above, so it is the
default shift.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

import logging

import numpy as np

from gaussperm.utils.config import get_config_float
from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import InvalidInputError
from gaussperm.utils.errors import NotPSDError
from gaussperm.utils.errors import NumericalError
from gaussperm.utils.errors import ValidationError


logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12


class DenseMatrix(object):
    """Immutable real matrix stored row-major in double precision.

    Args:
        data: nested sequence or ``np.ndarray`` with two dimensions. An empty
            sequence is the 0 x 0 matrix.
    """

    def __init__(self, data):
        array = np.array(data, dtype=np.float64)
        if array.size == 0 and array.ndim < 2:
            array = array.reshape(0, 0)

        if array.ndim != 2:
            raise InvalidInputError(
                'Matrix must be two dimensional, got {} dimensions'.format(
                    array.ndim))

        if not np.all(np.isfinite(array)):
            raise InvalidInputError('Matrix has non-finite entries')

        array = np.ascontiguousarray(array)
        array.flags.writeable = False
        self._array = array

    @property
    def rows(self):
        return self._array.shape[0]

    @property
    def cols(self):
        return self._array.shape[1]

    @property
    def shape(self):
        return self._array.shape

    @property
    def array(self):
        """Read-only ``np.ndarray`` view of the entries."""
        return self._array

    @property
    def entries(self):
        """Entries in row-major order."""
        return self._array.ravel()

    @property
    def is_square(self):
        return self.rows == self.cols

    def transpose(self):
        return DenseMatrix(self._array.T)

    def tolist(self):
        return self._array.tolist()

    def __getitem__(self, key):
        return self._array[key]

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return (self.shape == other.shape and
                bool(np.array_equal(self._array, other._array)))

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self.shape, self._array.tobytes()))

    def __repr__(self):
        return 'DenseMatrix({})'.format(self.tolist())


def as_matrix(a):
    if isinstance(a, DenseMatrix):
        return a
    return DenseMatrix(a)


def frobenius_norm(a):
    """Return the root of the sum of squared entries of ``a``."""
    a = as_matrix(a)
    if a.entries.size == 0:
        return 0.0
    return float(np.linalg.norm(a.array, 'fro'))


def operator_norm_upper(a):
    """Return a certified upper bound on the operator norm of ``a``.

    The Frobenius norm dominates the largest singular value, so it is
    returned as is; no spectral computation takes place.
    """
    return frobenius_norm(a)


def uniform_matrix(m, seed, low=-2.0, high=2.0):
    """Return an m x m matrix with entries uniform in [low, high)."""
    rng = np.random.default_rng(seed)
    return DenseMatrix(rng.uniform(low, high, size=(m, m)))


def check_symmetric(c, tol=SYMMETRY_TOL):
    scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
    if c.shape[0] != c.shape[1]:
        raise InvalidInputError('Covariance must be square')
    if c.size and float(np.max(np.abs(c - c.T))) > tol * scale:
        raise InvalidInputError('Matrix is not symmetric')


def cholesky(c, pivot_tol=None):
    """Factor a symmetric positive semidefinite matrix as ``L L^T``.

    Zero pivots (up to ``pivot_tol``) are accepted when the rest of their
    column vanishes as well, which lets singular PSD matrices through with a
    zero column in ``L``.

    Args:
        c (DenseMatrix): symmetric PSD matrix.
        pivot_tol (float): absolute tolerance for a pivot to count as zero.
            Defaults to ``PIVOT_TOL`` (1e-12) times the largest diagonal entry.

    Returns:
        DenseMatrix: lower-triangular ``L`` with non-negative diagonal.

    Raises:
        InvalidInputError: ``c`` is not symmetric.
        NotPSDError: a pivot is negative beyond tolerance, or a zero pivot
            has a non-zero column below it.
    """
    c = as_matrix(c).array
    check_symmetric(c)
    n = c.shape[0]

    if pivot_tol is None:
        scale = float(np.max(np.abs(np.diag(c)))) if n else 0.0
        pivot_tol = get_config_float('embedding', 'PIVOT_TOL', 1e-12) * scale

    chol = np.zeros((n, n))
    for j in range(n):
        row = chol[j, :j]
        pivot = c[j, j] - row.dot(row)
        residual = c[j + 1:, j] - chol[j + 1:, :j].dot(row)

        if pivot > pivot_tol:
            root = np.sqrt(pivot)
            chol[j, j] = root
            chol[j + 1:, j] = residual / root
            continue

        if pivot < -pivot_tol:
            raise NotPSDError(
                'Negative pivot {:.3e} at column {}'.format(pivot, j))

        # zero pivot: the column below must vanish too
        if residual.size and float(np.max(np.abs(residual))) > max(
                pivot_tol, 1e-12):
            raise NotPSDError(
                'Zero pivot with non-zero column at {}'.format(j))

    return DenseMatrix(chol)


class GaussianEmbedding(object):
    """Covariance ``B + (alpha + jitter) I`` of the 2M-variable field.

    Variables ``0..M-1`` form the row group and ``M..2M-1`` the column group.
    """

    def __init__(self, source, alpha, cov, chol, jitter_applied=0.0):
        self.source = source
        self.m = source.rows
        self.alpha = alpha
        self.cov = cov
        self.chol = chol
        self.jitter_applied = jitter_applied

    @property
    def alpha_effective(self):
        return self.alpha + self.jitter_applied

    @property
    def dimension(self):
        return 2 * self.m

    @property
    def row_group(self):
        return list(range(self.m))

    @property
    def col_group(self):
        return list(range(self.m, 2 * self.m))

    def __repr__(self):
        return 'GaussianEmbedding(m={}, alpha={!r}, jitter={!r})'.format(
            self.m, self.alpha, self.jitter_applied)


def block_covariance(a, shift):
    """Return ``[[shift I, A], [A^T, shift I]]`` as an ndarray."""
    m = a.rows
    cov = np.zeros((2 * m, 2 * m))
    cov[:m, m:] = a.array
    cov[m:, :m] = a.array.T
    cov[np.diag_indices(2 * m)] = shift
    return cov


def build_embedding(a, alpha=None, unsafe_alpha=False):
    """Build the Gaussian embedding of a square matrix.

    Args:
        a (DenseMatrix): square M x M matrix.
        alpha (float): diagonal shift. Defaults to the Frobenius norm of ``a``.
        unsafe_alpha (bool): accept an ``alpha`` below the Frobenius norm.
            The shift then only has to survive the Cholesky factorisation.

    Returns:
        GaussianEmbedding

    Raises:
        InvalidInputError: ``a`` is not square.
        ValidationError: ``alpha`` is negative, or below the Frobenius norm
            without ``unsafe_alpha``.
        NumericalError: the factorisation fails after every jitter retry.
    """
    a = as_matrix(a)
    if not a.is_square:
        raise InvalidInputError(
            'Matrix must be square, got {}x{}'.format(a.rows, a.cols))

    fro = frobenius_norm(a)
    if alpha is None:
        alpha = fro
    alpha = float(alpha)

    if not np.isfinite(alpha) or alpha < 0:
        raise ValidationError('alpha must be a non-negative number')

    if alpha < fro and not unsafe_alpha:
        raise ValidationError(
            'alpha={!r} is below the Frobenius norm {!r}; pass the unsafe '
            'override only when the operator norm is known to be smaller'
            .format(alpha, fro))

    logger.debug('Embedding {}x{} matrix with alpha={!r}'.format(
        a.rows, a.cols, alpha))

    retries = get_config_int('embedding', 'JITTER_RETRIES', 3)
    base = alpha if alpha > 0 else 1.0
    jitter_step = base * get_config_float('embedding', 'JITTER_SCALE', 1e-10)

    jitter = 0.0
    attempt = 0
    while True:
        cov = DenseMatrix(block_covariance(a, alpha + jitter))
        try:
            chol = cholesky(cov)
        except NotPSDError as e:
            # jitter sequence: step, 2 step, 4 step, ...
            if attempt > retries:
                raise NumericalError(
                    'Cholesky failed after {} jitter retries: {}'.format(
                        retries, e))
            jitter = jitter_step * 2 ** attempt
            attempt += 1
            logger.info('Cholesky failed ({}), retrying with jitter {!r}'
                        .format(e, jitter))
            continue

        return GaussianEmbedding(a, alpha, cov, chol, jitter)
