"""Gaussian product expectations by pairing enumeration.

For a centred Gaussian field with covariance C, the expectation of a product
of an even number of variables is the sum over pair partitions of the
products of paired covariances, and zero for an odd number. Restricting the
pairings so that no pair joins two legs of the same group gives the cross
sums used to write permanents as field expectations.

Legs are paired recursively: the lowest unpaired leg is joined with each
remaining candidate in turn. The unrestricted enumeration over 2k legs
visits (2k - 1)!! pairings.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from collections import namedtuple
import logging

import numpy as np

from gaussperm.utils.config import get_config_int
from gaussperm.utils.errors import ConsistencyError
from gaussperm.utils.errors import InvalidInputError
from gaussperm.utils.errors import SizeLimitError
from gaussperm.utils.matrix import DenseMatrix
from gaussperm.utils.matrix import as_matrix
from gaussperm.utils.matrix import check_symmetric
from gaussperm.utils.oracles import permanent_naive


logger = logging.getLogger(__name__)

AGREEMENT_TOL = 1e-9


PairingSum = namedtuple('PairingSum', ['value', 'pairings_counted'])


class CovarianceModel(object):
    """Centred Gaussian field given by its symmetric covariance matrix."""

    def __init__(self, cov):
        cov = as_matrix(cov)
        check_symmetric(cov.array)
        self.cov = cov
        self.n = cov.rows

    @classmethod
    def from_embedding(cls, embedding):
        return cls(embedding.cov)

    @classmethod
    def coupled_copies(cls, cov):
        """Model of two copies of the field with cross covariance ``cov``."""
        c = as_matrix(cov).array
        return cls(np.block([[c, c], [c, c]]))

    def check_indices(self, indices):
        for i in indices:
            if not 0 <= i < self.n:
                raise InvalidInputError(
                    'Variable index {} out of range for {} variables'.format(
                        i, self.n))


class VertexPartition(object):
    """Disjoint groups of variable indices; each index is one leg."""

    def __init__(self, groups):
        groups = [list(g) for g in groups]
        seen = set()
        for group in groups:
            for i in group:
                if i in seen:
                    raise InvalidInputError(
                        'Index {} appears in more than one group'.format(i))
                seen.add(i)
        self.groups = groups

    @property
    def legs(self):
        return [i for group in self.groups for i in group]

    @property
    def labels(self):
        return [g for g, group in enumerate(self.groups) for _ in group]


def max_legs():
    return get_config_int('wick', 'MAX_LEGS', 16)


def _check_leg_budget(count, limit):
    if limit is None:
        limit = max_legs()
    if count > limit:
        raise SizeLimitError(
            'Pairing enumeration limited to {} legs, got {}'.format(
                limit, count))


def _pairing_sum(cov, legs, labels):
    """Return (value, count) summed over the pairings of ``legs``.

    ``labels`` is None for unrestricted pairings; otherwise legs that share a
    label are never paired.
    """
    if not legs:
        return 1.0, 1

    first, rest = legs[0], legs[1:]
    first_label = labels[0] if labels is not None else None
    value, count = 0.0, 0
    for k, other in enumerate(rest):
        if labels is not None and labels[k + 1] == first_label:
            continue

        remaining = rest[:k] + rest[k + 1:]
        remaining_labels = None
        if labels is not None:
            remaining_labels = labels[1:k + 1] + labels[k + 2:]

        sub_value, sub_count = _pairing_sum(cov, remaining, remaining_labels)
        value += cov[first][other] * sub_value
        count += sub_count

    return value, count


def isserlis_expectation(model, indices, max_legs=None):
    """Expectation of ``prod_k X_{indices[k]}``, indices may repeat.

    Args:
        model (CovarianceModel)
        indices (list of int): 0-based variable indices, one per leg.
        max_legs (int): leg budget, defaults to the ``[wick] MAX_LEGS``.

    Returns:
        PairingSum: zero with no pairings for an odd number of legs.
    """
    indices = list(indices)
    _check_leg_budget(len(indices), max_legs)
    model.check_indices(indices)

    if len(indices) % 2:
        return PairingSum(0.0, 0)

    value, count = _pairing_sum(model.cov.tolist(), indices, None)
    return PairingSum(value, count)


def feynman_cross_expectation(model, partition, max_legs=None):
    """Sum over complete diagrams: pairings with no pair inside a group.

    Returns:
        PairingSum: zero with no pairings when no such pairing exists.
    """
    legs = partition.legs
    _check_leg_budget(len(legs), max_legs)
    model.check_indices(legs)

    if len(legs) % 2:
        return PairingSum(0.0, 0)

    value, count = _pairing_sum(model.cov.tolist(), legs, partition.labels)
    return PairingSum(value, count)


def wick_square_expectation(cov, max_legs=None):
    """Expectation of the squared Wick monomial of all variables of ``cov``.

    The Wick square pairs every leg of the first copy with a leg of the
    second copy, so the value is the permanent of ``cov``.
    """
    cov = as_matrix(cov)
    n = cov.rows
    model = CovarianceModel.coupled_copies(cov)
    partition = VertexPartition([range(n), range(n, 2 * n)])
    return feynman_cross_expectation(model, partition, max_legs=max_legs)


def perm_via_subfields(model, s, t):
    """Permanent of the cross covariance block between subfields ``s``, ``t``.

    Computed as the naive permanent of ``C[s, t]`` and as the cross pairing
    sum over the groups ``s`` and ``t``; the two must agree.

    Raises:
        ConsistencyError: the two computations disagree beyond 1e-9 relative.
    """
    s, t = list(s), list(t)
    if len(s) != len(t):
        raise InvalidInputError('Subfields must have the same size')
    if set(s) & set(t):
        raise InvalidInputError('Subfields must be disjoint')
    model.check_indices(s + t)

    block = DenseMatrix(model.cov.array[np.ix_(s, t)])
    direct = permanent_naive(block).value
    paired = feynman_cross_expectation(model, VertexPartition([s, t])).value

    if abs(direct - paired) > AGREEMENT_TOL * max(1.0, abs(direct)):
        raise ConsistencyError(
            'Subfield permanent {!r} disagrees with pairing sum {!r}'.format(
                direct, paired))

    logger.debug('perm_via_subfields: {!r}'.format(direct))
    return direct
