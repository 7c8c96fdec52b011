"""Exception types raised across the package."""


class TailfitError(Exception):
    """Base class for every error raised by tailfit."""


class DomainError(TailfitError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDataError(DomainError):
    """The data cannot identify the parameters of the requested family."""


class NumericError(TailfitError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""


class ParseError(TailfitError, ValueError):
    """Malformed input text.

    ``line`` is the 1-based line number of the offending row, if known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GofError(TailfitError):
    """Too many bootstrap replicates could not be refitted."""
