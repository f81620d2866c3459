"""Exception hierarchy shared by every module.

Two families matter to callers (and to the CLI exit codes): bad input and
numeric failure.
"""


class InputError(ValueError):
    """Rejected input: wrong shape, out-of-range argument, invalid file."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite or otherwise unusable value."""


class DivergedTrainingError(NumericError):
    def __init__(self, restart, message="non-finite loss"):
        self.restart = restart
        super().__init__(f"restart {restart}: {message}")


class NonPositiveKernelError(NumericError):
    def __init__(self, eigenvalue, message=None):
        self.eigenvalue = eigenvalue
        super().__init__(message or f"kernel matrix is not positive: eigenvalue {eigenvalue:.3e}")
