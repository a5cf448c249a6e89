"""Exception hierarchy.

Two families matter for the CLI exit codes: ValidationError (bad input or
out-of-domain request, exit 1) and NumericalError (a computation that was
attempted but failed or hit excluded data, exit 2).
"""


class DnlsError(Exception):
    pass


class ValidationError(DnlsError):
    """Input rejected before any numerics ran."""


class TailDecayError(ValidationError):
    """Field does not decay at the grid ends as a whole-line field must."""


class ParseError(ValidationError):
    """Malformed serialized payload; message names the offending key."""


class DomainError(ValidationError):
    """Argument outside the domain of the requested operation."""


class NumericalError(DnlsError):
    """A numerical procedure failed to converge or hit excluded data."""


class IntegrationError(NumericalError):
    """ODE or quadrature failure; message carries the location."""


class SpectralSingularityError(NumericalError):
    """1 - eps*lambda*|rho|^2 <= 0 somewhere on the real axis."""


class WindingError(NumericalError):
    """Argument-principle count unstable under contour refinement."""


class NonSimpleZeroError(NumericalError):
    """A multiple zero of the transmission coefficient was detected."""


class NotAnEigenvalueError(NumericalError):
    """Jost columns fail to be proportional at a claimed eigenvalue."""


class ConditioningError(NumericalError):
    """Dense solve failed for both pole normalizations."""


class BlowUpError(NumericalError):
    """Time stepper produced NaN/Inf; message carries the time stamp."""


class EvaluationError(NumericalError):
    """Special-function evaluation did not converge."""


class BreatherError(ValidationError):
    """Coincident soliton speeds; per-soliton phase shifts are undefined."""
