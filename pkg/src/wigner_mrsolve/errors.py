"""Exception hierarchy shared by all subpackages.

Each CLI-visible class carries the process exit code it maps to.
"""


class WignerError(Exception):
    exit_code = 1


class InvalidArgumentError(WignerError, ValueError):
    exit_code = 2


class UnsupportedOrderError(InvalidArgumentError):
    """A derivative order the chosen wavelet cannot represent."""


class DomainTooSmallError(InvalidArgumentError):
    pass


class PreconditionError(InvalidArgumentError):
    pass


class ConfigError(InvalidArgumentError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class NumericalBlowupError(WignerError, ArithmeticError):
    exit_code = 3

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class ConservationViolationError(WignerError):
    exit_code = 4

    def __init__(self, message, time=None, drift=None):
        super().__init__(message)
        self.time = time
        self.drift = drift


class NonConvergenceError(WignerError):
    exit_code = 5


class InsufficientDataError(InvalidArgumentError):
    pass


class OutputError(WignerError, OSError):
    exit_code = 10
