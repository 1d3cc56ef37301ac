"""Shared pytest fixtures for csdlab tests."""

import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from csdlab.core.channel import DiscreteJointChannel, GaussianChannel, bundled_channel
from csdlab.operations.tilting import RegularityConstants


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep CSDLAB_* variables from the developer's shell out of the tests."""
    for key in list(os.environ):
        if key.startswith('CSDLAB_'):
            monkeypatch.delenv(key, raising=False)


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    tmpdir = tempfile.mkdtemp()
    yield Path(tmpdir)
    shutil.rmtree(tmpdir, ignore_errors=True)


@pytest.fixture
def bsc():
    """Binary symmetric channel with crossover 0.11."""
    return bundled_channel('bsc_011')


@pytest.fixture
def identity():
    """Uniform binary X observed without noise."""
    return DiscreteJointChannel.identity(2)


@pytest.fixture
def independent():
    """Y independent of X."""
    return bundled_channel('independent')


@pytest.fixture
def random_channel():
    """The bundled asymmetric 4x4 channel."""
    return bundled_channel('random_4x4')


@pytest.fixture
def gaussian():
    """Unit-SNR additive Gaussian channel."""
    return GaussianChannel(1.0, 1.0)


@pytest.fixture
def moderate_constants():
    """Hand-made constants whose ball correction stays finite."""
    return RegularityConstants(
        lambda_lo=0.5,
        lambda_hi=1.5,
        m2_lo=0.2,
        m2_hi=1.0,
        m3_hi=2.0,
        log_M_lo=np.log(0.1),
        n0=10,
        epsilon=0.01,
    )


def random_discrete_channel(rng, n_x, n_y, name='random'):
    """Dense random joint law."""
    joint = rng.dirichlet(np.ones(n_x * n_y)).reshape(n_x, n_y)
    return DiscreteJointChannel(joint, name=name)


def write_json(path, document):
    """Write a JSON document and return its path as a string."""
    Path(path).write_text(json.dumps(document))
    return str(path)
