"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested function."""


class CoverageError(RuntimeError):
    """A zero table does not cover the window a computation needs."""

    def __init__(self, message, needed=None):
        super().__init__(message)
        self.needed = needed


class MissedZeroError(RuntimeError):
    """Zero count in a window falls short of the Riemann-von Mangoldt estimate."""

    def __init__(self, message, window=None, found=None, expected=None):
        super().__init__(message)
        self.window = window
        self.found = found
        self.expected = expected


class ZeroTableFormatError(ValueError):
    """A zero-table file could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
