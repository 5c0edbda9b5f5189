"""Exception types shared across the engine."""


class NmqfiError(Exception):
    """Base class for all engine errors."""


class ConfigError(NmqfiError):
    """Scenario configuration failed to parse or validate."""


class CoverageError(NmqfiError):
    """A requested window reaches beyond the solved response grid."""


class SolverInstabilityError(NmqfiError):
    """Response solution left the physical |G| <= 1 region."""


class AlignmentError(NmqfiError):
    """Initial state does not satisfy the aligned-variance condition."""


class ConsistencyError(NmqfiError):
    """Two redundant internal routes disagreed beyond tolerance."""


class EstimationError(NmqfiError):
    """Estimation is impossible for the supplied scenario."""
