"""Exception hierarchy shared across the package."""


class KinexError(Exception):
    """Base class for all package-specific errors."""


class DomainError(KinexError, ValueError):
    """An argument violated an operation's documented domain."""


class ConfigError(KinexError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConservationError(KinexError):
    """Total money drifted beyond tolerance during a run."""
