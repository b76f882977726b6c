from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

from datetime import datetime
import hashlib
import io
import json
import logging
import math
import re

import six

from gaussperm import __version__
from gaussperm.utils.errors import MatrixParseError
from gaussperm.utils.matrix import DenseMatrix


logger = logging.getLogger(__name__)

separator_re = re.compile(r'[,\s]+')


def parse_matrix(text):
    """Parse the matrix text format.

    One row per line, entries separated by commas and/or whitespace, lines
    starting with ``#`` and blank lines ignored.

    Raises:
        MatrixParseError: bad entry or ragged rows, with the line number.
    """
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue

        try:
            row = [float(x) for x in separator_re.split(line) if x]
        except ValueError as e:
            raise MatrixParseError(str(e), lineno)

        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MatrixParseError(
                'expected {} entries, found {}'.format(width, len(row)),
                lineno)
        rows.append(row)

    try:
        return DenseMatrix(rows)
    except Exception as e:
        raise MatrixParseError(str(e))


def read_matrix(path):
    logger.debug('Reading matrix from {}'.format(path))
    with io.open(path, encoding='utf-8') as f:
        return parse_matrix(f.read())


def serialize_matrix(matrix):
    """Write ``matrix`` in the text format; ``repr`` keeps floats exact."""
    return ''.join(
        ','.join(repr(float(x)) for x in row) + '\n'
        for row in matrix.tolist())


def matrix_digest(matrix):
    content = serialize_matrix(matrix).encode('utf-8')
    return {
        'rows': matrix.rows,
        'cols': matrix.cols,
        'sha256': hashlib.sha256(content).hexdigest(),
    }


def build_run_report(command, payload, matrix=None):
    """Wrap a command payload with its provenance.

    Args:
        command (list): command line echo.
        payload (dict): EstimateReport, PermanentValue, PairingSum data etc.
        matrix (DenseMatrix): input matrix, digested when given.
    """
    return {
        'command': list(command),
        'input': matrix_digest(matrix) if matrix is not None else None,
        'payload': payload,
        'version': __version__,
        'timestamp': datetime.utcnow().isoformat() + 'Z',
    }


def json_safe(value):
    """Replace non-finite floats by the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(value, dict):
        return dict((k, json_safe(v)) for k, v in six.iteritems(value))
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return str(float(value))
    return value


def report_to_json(report):
    return json.dumps(json_safe(report), sort_keys=True, allow_nan=False)


def format_payload(payload, indent=''):
    """Human readable ``key: value`` lines for a payload dict."""
    lines = []
    for key, value in sorted(six.iteritems(payload)):
        if isinstance(value, dict):
            lines.append('{}{}:'.format(indent, key))
            lines.append(format_payload(value, indent + '  '))
        else:
            lines.append('{}{}: {}'.format(indent, key, value))
    return '\n'.join(lines)
