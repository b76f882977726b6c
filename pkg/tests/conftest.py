import numpy as np
import pytest
import six

from gaussperm.utils import config as config_module
from gaussperm.utils.matrix import DenseMatrix


@pytest.fixture(autouse=True)
def empty_config():
    """Isolate every test from the user's config files."""
    config = six.moves.configparser.ConfigParser()
    config_module.CACHE['config'] = config
    yield config
    config_module.reset_config()


@pytest.fixture
def two_by_two():
    return DenseMatrix([[1.0, 2.0], [3.0, 4.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
