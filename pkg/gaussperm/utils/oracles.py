"""Exact permanents.

Three independent methods serve as ground truth for everything else:

permanent_naive(a)
    Sum over all permutations, O(M! M).
permanent_ryser(a)
    Ryser inclusion-exclusion with Gray-code subset order, O(2^M M).
glynn_full_enumeration(a)
    Average of the Glynn estimator over every sign vector, O(2^M M).

The size ceilings are read from the ``[oracles]`` config section.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from collections import namedtuple
from itertools import permutations
import logging

import numpy as np

from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import InvalidInputError
from gaussperm.utils.errors import SizeLimitError
from gaussperm.utils.matrix import as_matrix


logger = logging.getLogger(__name__)

NAIVE = 'naive'
RYSER = 'ryser'
GLYNN_ENUM = 'glynn-enum'
METHODS = (NAIVE, RYSER, GLYNN_ENUM)

DEFAULT_LIMITS = {
    NAIVE: ('NAIVE_MAX_M', 12),
    RYSER: ('RYSER_MAX_M', 30),
    GLYNN_ENUM: ('GLYNN_MAX_M', 20),
}


class PermanentValue(namedtuple('PermanentValue',
                                ['value', 'method', 'ops_performed'])):
    __slots__ = ()

    def to_dict(self):
        return dict(self._asdict())


def size_limit(method):
    option, default = DEFAULT_LIMITS[method]
    return get_config_int('oracles', option, default)


def _square_input(a, method, max_m):
    a = as_matrix(a)
    if not a.is_square:
        raise InvalidInputError(
            'Permanent needs a square matrix, got {}x{}'.format(
                a.rows, a.cols))

    if max_m is None:
        max_m = size_limit(method)
    if a.rows > max_m:
        raise SizeLimitError(
            '{} permanent limited to M <= {}, got M = {}'.format(
                method, max_m, a.rows))
    return a


def permanent_naive(a, max_m=None):
    """Calculate the permanent by summing over all permutations.

    Args:
        a (DenseMatrix): square matrix.
        max_m (int): size ceiling, defaults to ``NAIVE_MAX_M``.

    Returns:
        PermanentValue: ``ops_performed`` counts the entry multiplications.
    """
    a = _square_input(a, NAIVE, max_m)
    m = a.rows
    rows = a.tolist()

    permanent = 0.0
    ops = 0
    for perm in permutations(range(m)):
        term = 1.0
        for i, j in enumerate(perm):
            term *= rows[i][j]
        permanent += term
        ops += m

    return PermanentValue(permanent, NAIVE, ops)


def permanent_ryser(a, max_m=None):
    """Calculate the permanent with Ryser's formula.

    perm(A) = (-1)^M sum_S (-1)^|S| prod_i sum_{j in S} A_ij

    Subsets S of the columns are visited in Gray-code order, so every step
    adds or removes a single column from the running row sums.

    Returns:
        PermanentValue: ``ops_performed`` counts row-sum updates plus
        product multiplications, 2M per subset.
    """
    a = _square_input(a, RYSER, max_m)
    m = a.rows
    if m == 0:
        return PermanentValue(1.0, RYSER, 0)

    cols = a.array.T
    rowsums = np.zeros(m)
    in_subset = np.zeros(m, dtype=bool)
    size = 0
    total = 0.0
    ops = 0

    for k in range(1, 2 ** m):
        # the Gray code flips the lowest set bit of k
        j = (k & -k).bit_length() - 1
        if in_subset[j]:
            rowsums -= cols[j]
            size -= 1
        else:
            rowsums += cols[j]
            size += 1
        in_subset[j] = not in_subset[j]

        term = np.prod(rowsums)
        if size % 2:
            total -= term
        else:
            total += term
        ops += 2 * m

    if m % 2:
        total = -total

    return PermanentValue(float(total), RYSER, ops)


def glynn_full_enumeration(a, max_m=None):
    """Average ``Gly_x(A) = prod_i x_i prod_j sum_i A_ij x_i`` over all signs.

    Sign vectors are walked in Gray-code order starting from all ones; a
    flip of ``x_k`` moves the column sums by ``-2 x_k A[k, :]``. The sum is
    divided by ``2^M`` at the end.
    """
    a = _square_input(a, GLYNN_ENUM, max_m)
    m = a.rows
    if m == 0:
        return PermanentValue(1.0, GLYNN_ENUM, 0)

    rows = a.array
    signs = np.ones(m)
    colsums = rows.sum(axis=0)
    sign_product = 1.0

    total = float(np.prod(colsums))
    ops = m
    for k in range(1, 2 ** m):
        j = (k & -k).bit_length() - 1
        colsums = colsums - 2.0 * signs[j] * rows[j]
        signs[j] = -signs[j]
        sign_product = -sign_product
        total += sign_product * np.prod(colsums)
        ops += 2 * m

    return PermanentValue(total / 2.0 ** m, GLYNN_ENUM, ops)


ORACLES = {
    NAIVE: permanent_naive,
    RYSER: permanent_ryser,
    GLYNN_ENUM: glynn_full_enumeration,
}


def permanent(a, method=RYSER, max_m=None):
    try:
        oracle = ORACLES[method]
    except KeyError:
        raise InvalidInputError('Unknown permanent method {}'.format(method))

    logger.debug('Computing {} permanent'.format(method))
    return oracle(a, max_m=max_m)
