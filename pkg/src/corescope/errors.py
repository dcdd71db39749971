"""Exception hierarchy shared by every corescope module."""


class CorescopeError(Exception):
    """Base class for all errors raised by corescope."""


class GraphParseError(CorescopeError, ValueError):
    """Malformed or empty edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(CorescopeError, ValueError):
    """A generator was asked for something it cannot build."""


class OracleRefusal(CorescopeError):
    """A brute-force oracle refused an input above its size budget."""


class ExposureLimitError(CorescopeError):
    """Exact subset enumeration would exceed the configured cluster limit."""
