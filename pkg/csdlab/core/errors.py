"""Exception hierarchy for csdlab.

Every error carries the process exit code the CLI reports for it, so
library callers and the command line agree on what went wrong.
"""


class CsdlabError(Exception):
    """Base class for all csdlab errors."""

    exit_code = 1


class ConfigError(CsdlabError):
    """Experiment configuration is missing or invalid."""

    exit_code = 2


class InvalidEpsilon(ConfigError):
    """Typicality tolerance violates the I +/- 3 epsilon endpoint conditions."""


class ChannelParseError(CsdlabError):
    """A channel spec file could not be read or does not follow the schema."""

    exit_code = 3


class BoundViolation(CsdlabError):
    """An asserted bound or identity failed during an experiment."""

    exit_code = 4


class ProposalBudgetExceeded(CsdlabError):
    """The sampler could not certify its argmin within max_proposals."""

    exit_code = 5


class BlockTooLarge(CsdlabError):
    """A level distribution outgrew the configured support cap."""

    exit_code = 5


class InvalidChannel(CsdlabError):
    """Channel parameters violate construction invariants."""


class AbsoluteContinuityViolation(CsdlabError):
    """Target distribution puts mass where the prior has none."""


class SymmetryRequired(CsdlabError):
    """Exact-by-symmetry evaluation requested on an asymmetric channel."""


class SingularChannel(CsdlabError):
    """Operation needs a positive conditional log-ratio variance."""


class EmptySupport(CsdlabError):
    """Likelihood ratio vanishes on the whole alphabet for some y."""


class EmptySet(CsdlabError):
    """Subset has zero prior probability."""


class RadiusOutOfRange(CsdlabError):
    """Ball radius lies outside the tilted-mean range of the interval."""


class IntervalNotFound(CsdlabError):
    """No grid interval around 1 satisfies the variance floor."""


EXIT_CODES = {
    0: 'ok',
    1: 'domain error',
    2: 'configuration error',
    3: 'channel parse error',
    4: 'bound violation',
    5: 'budget exceeded',
}
