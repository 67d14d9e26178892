"""Exception types shared across the package."""


class SeatailError(Exception):
    """Base class for all package errors."""


class DomainError(SeatailError, ValueError):
    """Argument outside the mathematical domain of a function."""


class LightConeSingularity(SeatailError):
    """Evaluation requested too close to the light cone z = 0."""


class UnsupportedRegion(SeatailError):
    """Evaluation requested in a region outside the supported scope."""


class DegenerateSpectrum(SeatailError):
    """|lambda| crossings make a spectral gradient unreliable."""


class ConvergenceDomain(SeatailError):
    """Parameters outside the convergence domain of a transform."""


class QuadratureFailure(SeatailError):
    """An adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class MatchingFailure(SeatailError):
    """Root finding on a scheme matching condition did not converge."""


class ScaleCollision(SeatailError):
    """Two layer windows overlap for the requested epsilon."""


class NoBracket(SeatailError):
    """A sign change could not be bracketed in the search window."""


class BoundaryDetectionFailure(SeatailError):
    """Regime boundaries inside the integration window could not be bracketed."""


class RangeError(SeatailError, ValueError):
    """Scheme parameter outside the admissible range."""


class TruncationWarning(UserWarning):
    """Last retained term of a truncated expansion is not negligible."""


class SmallnessWarning(UserWarning):
    """A tail violates the momentum-space smallness condition."""
