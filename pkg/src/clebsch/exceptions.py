"""Exception types raised by the library."""


class ClebschError(Exception):
    """Base class for all library errors."""


class DomainError(ClebschError, ValueError):
    """A matrix map was evaluated outside its domain (singular factor, non-skew input)."""


class SolverConvergenceError(ClebschError, RuntimeError):
    """An implicit solve did not reach its tolerance within the iteration budget."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class ConfigError(ClebschError, ValueError):
    """Invalid experiment configuration. ``line`` is 1-based when known."""

    def __init__(self, message, line=None, key=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key
