"""Exceptions raised by gaussperm.

Each error carries the process exit code the CLI uses when it escapes a
subcommand.
"""
from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals


class GaussPermError(Exception):
    exit_code = 1


class InvalidInputError(GaussPermError):
    """Raised for malformed matrices, indices or shapes."""
    exit_code = 3


class ValidationError(GaussPermError):
    """Raised when a parameter violates a documented precondition."""
    exit_code = 3


class MatrixParseError(GaussPermError):
    exit_code = 3

    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super(MatrixParseError, self).__init__(message)
        self.line = line


class SizeLimitError(GaussPermError):
    """Raised when an exact method is asked for a size above its ceiling."""
    exit_code = 3


class NumericalError(GaussPermError):
    exit_code = 4


class NotPSDError(NumericalError):
    pass


class ProductOverflowError(NumericalError):
    """Raised when a sample product leaves the double range."""

    def __init__(self, sample_index):
        super(ProductOverflowError, self).__init__(
            'Product of sample {} overflowed; reduce M or alpha'.format(
                sample_index))
        self.sample_index = sample_index


class ConsistencyError(GaussPermError):
    """Raised when two computations that must agree do not."""
    exit_code = 5
