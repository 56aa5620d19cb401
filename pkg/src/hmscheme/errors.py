"""Exception types shared across the package.

Two families matter to the command line interface: configuration problems
(bad arguments, mismatched shapes, unusable sweep setups) map to exit
status 2, while numerical failures (invalid discriminants, non-finite
updates, singular indicator points) map to exit status 3.
"""


class HMSchemeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(HMSchemeError):
    """Invalid arguments, shapes or run setups (CLI exit status 2)."""


class NumericalError(HMSchemeError):
    """A computation left its domain of validity (CLI exit status 3)."""


class InvalidParams(ConfigError):
    """A parameter is out of range (nonpositive step size, bad sweep, ...)."""


class DimensionMismatch(ConfigError):
    """Vector or matrix shapes are incompatible."""


class InsufficientData(ConfigError):
    """Too few data points for the requested fit."""


class StepCountOverflow(ConfigError):
    """A run would need more steps than the hard safety limit."""


class NonSymmetric(ConfigError):
    """Matrix entries violate the symmetry tolerance."""


class IndefiniteOperator(ConfigError):
    """An eigenvalue lies below the positive-semidefinite clamp threshold."""


class NonFinite(NumericalError):
    """A NaN or infinity appeared in an update."""


class NegativeDiscriminant(NumericalError):
    """The two-rate closed form needs 1 - 4*lambda*eps > 0."""


class SingularIndicator(NumericalError):
    """The growth indicator is evaluated at its singular point 4*eps*lambda = 1."""
