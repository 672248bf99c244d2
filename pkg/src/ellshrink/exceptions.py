"""Exception types shared across the package.

Most errors double as ``ValueError`` so callers that only know the
scikit-learn conventions can catch them the usual way.
"""


class EllshrinkError(Exception):
    """Base class for all package-specific errors."""


class InvalidParameterError(EllshrinkError, ValueError):
    """A constructor or operation received an out-of-domain parameter."""


class BadSpecError(EllshrinkError, ValueError):
    """A textual spec (mixing, covariance, estimator, theta) failed to parse."""


class DimensionMismatchError(EllshrinkError, ValueError):
    """Vector/matrix dimensions are inconsistent."""


class NotPositiveDefiniteError(EllshrinkError, ValueError):
    """A matrix required to be symmetric positive definite is not."""


class DegenerateScatterError(EllshrinkError, ValueError):
    """The scatter matrix is singular: rows lie in an affine subspace.

    Carries ``replicate`` when raised from inside a Monte Carlo run.
    """

    def __init__(self, message, replicate=None):
        super().__init__(message)
        self.replicate = replicate


class SignedMeasureSamplingError(EllshrinkError, ValueError):
    """Attempt to draw samples from a signed (non-probability) mixing measure."""


class DivergentMomentError(EllshrinkError, ValueError):
    """A required moment of the mixing measure does not exist."""


class DofTooSmallError(EllshrinkError, ValueError):
    """Wishart degrees of freedom below the matrix dimension."""


class BadGridError(EllshrinkError, ValueError):
    """A grid or tail sequence handed to a condition check is malformed."""


class TooFewSamplesError(EllshrinkError, ValueError):
    """Not enough reference samples for an empirical integrability check."""


class DimensionTooLargeError(EllshrinkError, ValueError):
    """Tensor-product quadrature requested beyond the supported dimension."""


class ConfigError(EllshrinkError, ValueError):
    """An experiment config file failed to parse; carries a line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
