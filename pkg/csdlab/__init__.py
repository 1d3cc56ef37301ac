"""csdlab - channel simulation divergence experiments in Python."""

__version__ = '0.1.0'

from csdlab.core.channel import (DiscreteJointChannel, GaussianChannel, Normal,
                                 bundled_channel, load_channel, mutual_information)
from csdlab.core.config import ExperimentConfig, get_config
from csdlab.core.errors import CsdlabError
from csdlab.operations.blocks import block_level_distribution, expected_block_csd
from csdlab.operations.divergence import (channel_simulation_divergence, divergence_gap,
                                          kl_divergence, width_function)

__all__ = [
    'DiscreteJointChannel',
    'GaussianChannel',
    'Normal',
    'bundled_channel',
    'load_channel',
    'mutual_information',
    'ExperimentConfig',
    'get_config',
    'CsdlabError',
    'block_level_distribution',
    'expected_block_csd',
    'channel_simulation_divergence',
    'divergence_gap',
    'kl_divergence',
    'width_function',
]
