"""Exception hierarchy shared by all oligodyn modules."""


class OligodynError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(OligodynError, ValueError):
    """Invalid user input: parameters, model files, state vectors."""


class ScalarModeError(ValidationError):
    """Exact rationals and floats were mixed in one computation."""


class DecoupledSystemError(ValidationError):
    """b = 0: the equations decouple and the time rescaling t -> t/b is undefined."""


class DegenerateError(OligodynError):
    """A linear system that should be regular turned out singular."""


class NotApplicableError(OligodynError):
    """The preconditions of a construction do not hold for this model."""


class DomainError(OligodynError, ValueError):
    """A function was evaluated outside the set where it is defined."""


class ConsistencyError(OligodynError):
    """Two independent computations that must agree did not."""


class IntegrationError(OligodynError):
    """The ODE solver could not continue.

    ``t`` and ``state`` hold the last accepted point.
    """

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
