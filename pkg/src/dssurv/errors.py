"""Exception hierarchy shared by the library and the command line front end."""


class DSSurvError(Exception):
    """Base class for all errors raised by dssurv."""


class InvalidInputError(DSSurvError, ValueError):
    """Data or arguments that violate a documented precondition."""


class DomainError(DSSurvError, ValueError):
    """A numeric argument lies outside the domain of a function."""


class ParseError(DSSurvError):
    """A trial CSV could not be read; carries the offending location."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class ConfigError(DSSurvError):
    """Command configuration is incomplete or inconsistent."""
