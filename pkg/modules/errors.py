"""Exceptions raised by the geometry engine."""


class FinslerError(Exception):
    pass


class DomainError(FinslerError, ValueError):
    """A vector or plane lies outside the domain of a formula (y = 0, |y2| = 0, ...)."""


class AdmissibilityError(FinslerError):
    """The fundamental tensor is singular or indefinite at the given vector."""

    def __init__(self, message, y=None):
        super().__init__(message)
        self.y = y


class NotNaturallyReductiveError(FinslerError):
    pass


class ConfigError(FinslerError, ValueError):
    pass


class SpaceFileError(FinslerError):
    """Problems reading a space description; carries the line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
