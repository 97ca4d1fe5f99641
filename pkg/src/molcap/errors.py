"""Exception types shared across the package."""


class MolcapError(Exception):
    """Base class for all package-specific errors."""


class QuadratureError(MolcapError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Attributes:
        achieved: error estimate reported by the integrator.
        requested: tolerance that was asked for.
    """

    def __init__(self, message, achieved=None, requested=None):
        super().__init__(message)
        self.achieved = achieved
        self.requested = requested


class ConvergenceError(MolcapError):
    """An iterative solver stopped before certifying its tolerance.

    Attributes:
        bracket_width: width of the last valid lower/upper bracket, if any.
    """

    def __init__(self, message, bracket_width=None):
        super().__init__(message)
        self.bracket_width = bracket_width


class EstimationError(MolcapError):
    """A Monte Carlo estimate did not reach the requested precision."""


class AlphabetSizeError(MolcapError):
    """A constructed channel would exceed the configured size guard."""
