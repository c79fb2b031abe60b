"""Exception hierarchy shared by every module of the package."""


class CdNozzleError(Exception):
    """Base class for all errors raised by cdnozzle."""


class DomainError(CdNozzleError, ValueError):
    """An argument lies outside the domain of a formula."""


class RangeError(DomainError):
    """A Riemann-invariant difference is not attainable by any supersonic pressure."""


class ConfigError(CdNozzleError, ValueError):
    """A configuration document is malformed or violates a problem invariant."""


class BreakdownError(CdNozzleError, ArithmeticError):
    """The computed flow left the regime where the smooth supersonic theory applies."""


class HyperbolicityError(BreakdownError):
    """A state became sonic or subsonic, or an eigenvalue has the wrong sign."""


class PerturbationTooLargeError(BreakdownError):
    """A Picard iterate left the admissible ball around the background solution."""


class IterationError(CdNozzleError, RuntimeError):
    """The Picard iteration failed to converge within the iteration cap."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class SolutionInvalidError(CdNozzleError, ValueError):
    """A stored solution violates a structural requirement (e.g. nonpositive mass flux)."""
