"""Exception hierarchy shared by the library and the command line."""


class TailfitError(Exception):
    """Base class for all tailfit errors."""


class InvalidParameterError(TailfitError, ValueError):
    pass


class DegenerateSupportError(InvalidParameterError):
    pass


class InvalidToleranceError(InvalidParameterError):
    pass


class DomainError(TailfitError, ValueError):
    """Evaluation requested outside the support of a distribution."""


class ParseError(TailfitError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EmptySupportError(TailfitError, ValueError):
    pass


class InsufficientDataError(TailfitError, ValueError):
    pass


class ZeroVarianceError(InsufficientDataError):
    pass


class SearchFailureError(TailfitError, RuntimeError):
    pass
