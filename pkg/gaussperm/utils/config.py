from __future__ import absolute_import
from __future__ import division
from __future__ import print_function
from __future__ import unicode_literals

import logging
import os

import six

from gaussperm.utils.errors import ValidationError


logger = logging.getLogger(__name__)
CACHE = {}

CONFIG_PATHS = (
    '~/.config/gaussperm',
    '~/.gausspermrc',
    '.gausspermrc',
)

# option -> parser used by validate_config
NUMERIC_OPTIONS = {
    'oracles': {
        'NAIVE_MAX_M': int,
        'RYSER_MAX_M': int,
        'GLYNN_MAX_M': int,
        'CHECK_EXACT_MAX_M': int,
    },
    'wick': {
        'MAX_LEGS': int,
        'VARIANCE_MAX_M': int,
    },
    'embedding': {
        'JITTER_RETRIES': int,
        'JITTER_SCALE': float,
        'PIVOT_TOL': float,
    },
    'sampler': {
        'SEED': int,
        'CHUNK_SIZE': int,
        'THREADS': int,
    },
    'estimate': {
        'DELTA': float,
    },
}

# options for which zero is a valid value
ZERO_ALLOWED = {('sampler', 'SEED')}


def get_config(validate=True):
    """Read gaussperm configs.

    Returns
        ConfigParser config object.
    """
    cached_config = CACHE.get('config')
    if cached_config is not None:
        return cached_config

    logger.debug('Reading config from {}'.format(CONFIG_PATHS))
    config = six.moves.configparser.ConfigParser()
    config.read([os.path.expanduser(x) for x in CONFIG_PATHS])

    if validate:
        validate_config(config)

    CACHE['config'] = config

    return config


def reset_config():
    """Drop the cached config so the next lookup re-reads the files."""
    CACHE.pop('config', None)


def get_config_value(config, section, option, default=None):
    """Provide a getter for configparser that supports a default.

    Args:
        config (ConfigParser): The ``ConfigParser``
        section (str): The section the setting is in
        option (str): The name of the option
        default (object): The optional default.
    """
    try:
        return config.get(section, option)
    except (six.moves.configparser.NoSectionError,
            six.moves.configparser.NoOptionError):
        return default


def get_config_int(section, option, default):
    value = get_config_value(get_config(), section, option)
    if value is None:
        return default
    return int(value)


def get_config_float(section, option, default):
    value = get_config_value(get_config(), section, option)
    if value is None:
        return default
    return float(value)


def validate_config(config):
    for section, options in six.iteritems(NUMERIC_OPTIONS):
        for option, parse in six.iteritems(options):
            raw = get_config_value(config, section, option)
            if raw is None:
                continue

            try:
                value = parse(raw)
            except ValueError:
                raise ValidationError(
                    'Invalid {} in [{}] config: {}'.format(
                        option, section, raw))

            if value < 0 or (value == 0 and
                             (section, option) not in ZERO_ALLOWED):
                raise ValidationError(
                    '{} in [{}] config must be positive'.format(
                        option, section))
