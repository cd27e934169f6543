class RestartKitError(Exception):
    pass


class InputError(RestartKitError, ValueError):
    """Invalid argument, shape, or configuration."""


class NumericError(RestartKitError, ArithmeticError):
    """An iteration produced a non-finite value.

    ``trace`` holds the records accumulated before the failure.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
