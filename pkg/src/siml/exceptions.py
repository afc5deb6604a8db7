"""Exception hierarchy shared across the package.

Invalid arguments (bad shapes, out-of-range parameters) raise plain
``ValueError``; the classes below mark failures that callers may want to
handle specifically, e.g. to continue a scan after one candidate fails.
"""


class SimlError(Exception):
    """Base class for package-specific failures."""


class CoherencyError(SimlError):
    """The sieve gram matrix is rank deficient, the estimator is unidentifiable."""


class ConditioningError(SimlError):
    """A linear system is too ill-conditioned to solve reliably."""


class IdentifiabilityError(SimlError):
    """Joint noise estimation requires strictly fewer sieve functions than sensors."""


class LikelihoodDomainError(SimlError):
    """The candidate model covariance is not positive definite."""


class InversionError(SimlError):
    """A covariance inverse is undefined; diagonal loading is required."""


class UndefinedMetricError(SimlError):
    """The metric is undefined for the given inputs (e.g. all-zero reference)."""


class ScanError(SimlError):
    """Every candidate of a model-order scan failed."""


class ConfigError(SimlError):
    """Experiment configuration is invalid; message names the offending field."""
