"""Exception types shared across the package."""


class BlowlabError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(BlowlabError, ValueError):
    """An argument violates a documented precondition."""


class DomainTooSmallError(BlowlabError):
    """Physical data does not cover the initial lightcone slice."""


class GaugeSingularError(BlowlabError):
    """The requested gauge solution has already blown up in this frame."""


class NumericalFailureError(BlowlabError):
    """A dense linear-algebra routine failed to converge."""


class SpectralFailureError(BlowlabError):
    """No eigenvalue close enough to the expected unstable one was found."""


class IntegrationFailureError(BlowlabError):
    """Time stepping produced a non-finite value.

    Carries the last similarity time at which the state was still finite.
    """

    def __init__(self, message, last_tau=None):
        super().__init__(message)
        self.last_tau = last_tau


class UndefinedRateError(BlowlabError):
    """Growth-rate fit attempted on nonpositive amplitudes."""


class StiffFailureError(BlowlabError):
    """The boundary-value ODE solver failed to reach the target endpoint."""


class OutOfStripError(BlowlabError):
    """Spectral parameter lies outside the strip where the Green function
    construction is used."""


class DegenerateParameterError(BlowlabError):
    """Spectral parameter sits on a degenerate exponent (lambda = -1/2)."""


class InconsistentWronskianError(BlowlabError):
    """The scaled Wronskian varies across the interval more than tolerated."""


class EigenvalueSingularityError(BlowlabError):
    """Green function requested at (numerically) vanishing Wronskian."""


class EvaluationDomainError(BlowlabError):
    """Hypergeometric evaluation requested outside the reachable domain."""


class PoleError(BlowlabError):
    """Closed-form Wronskian evaluated at a Gamma pole.

    ``side`` records which Gamma factor is responsible ('numerator' poles
    are zeros of the function; 'denominator' poles are its actual poles).
    """

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class PartialResultError(BlowlabError):
    """A long computation failed part-way; carries what was computed.

    ``partial`` holds whatever portion of the result was assembled before
    the failure, for diagnostics.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ShootingBracketError(BlowlabError):
    """Both ends of the shooting bracket classify the same way."""
