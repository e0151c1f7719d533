"""Exception hierarchy.

Validation problems subclass :class:`ValueError` so callers that only care
about "bad input" can catch that.  Numerical failures share
:class:`NumericalError`, which the CLI maps to exit code 4.
"""


class ErsatzError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ErsatzError, ValueError):
    """A parameter lies outside its admissible range."""


class LengthError(ErsatzError, ValueError):
    """A series is too short for the requested embedding or increment."""


class NumericalError(ErsatzError):
    """A numerical procedure could not produce a valid result."""


class SynthesisError(NumericalError):
    """Circulant embedding produced a covariance that is not positive."""


class ConvergenceError(NumericalError):
    """An iterative solve did not reach its tolerance."""


class DegenerateEstimateError(NumericalError):
    """A nearest-neighbor estimate is undefined (ties, constant input)."""
