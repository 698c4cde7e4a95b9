"""Exception types shared across the package."""


class PucciLabError(Exception):
    """Base class for all package errors."""


class InputError(PucciLabError, ValueError):
    """Invalid argument values or inconsistent inputs."""


class DomainError(InputError):
    """A point lies outside the domain it is evaluated on."""


class EvaluationError(InputError):
    """A state left the range on which a tabulated function is defined."""


class ConfigError(PucciLabError, ValueError):
    """Malformed run configuration; ``key`` is the dotted path of the offender."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class InternalError(PucciLabError, RuntimeError):
    """A condition that validated inputs should have made impossible."""


class ConvergenceError(PucciLabError, RuntimeError):
    """An iterative solve did not meet its tolerance; carries the last iterate."""

    def __init__(self, message, last=None):
        self.last = last
        super().__init__(message)


class ResolutionError(PucciLabError, RuntimeError):
    """The grid is too coarse to certify the requested bound."""


class IdentityViolation(PucciLabError, RuntimeError):
    """A checked identity failed beyond its tolerance budget."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class SaddleViolation(IdentityViolation):
    """A growth-rate cell broke the min-max inequalities."""


class PositivityError(PucciLabError, RuntimeError):
    """A wealth path became non-positive; carries the first offending time."""

    def __init__(self, message, time=None):
        self.time = time
        super().__init__(message)
