"""Exception types shared across the toolkit."""


class CorrclustError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(CorrclustError, ValueError):
    """An argument is outside its documented domain."""


class GenerationFailureError(CorrclustError, RuntimeError):
    """Random instance construction did not succeed within the retry budget."""


class DegenerateInstanceError(CorrclustError, ValueError):
    """The instance lacks the structure an operation requires (e.g. no edges)."""


class DegenerateTopologyError(CorrclustError, ValueError):
    """Degree distribution admits no percolation estimate (second moment equals first)."""


class DegenerateCorrelationError(CorrclustError, ValueError):
    """Correlation matrix has no usable (nonzero off-diagonal) entries."""


class SizeLimitError(CorrclustError, ValueError):
    """Problem size exceeds the hard wall of an exhaustive or statevector routine."""


class ParseError(CorrclustError, ValueError):
    """A text artifact could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigError(CorrclustError, ValueError):
    """An experiment configuration is inconsistent or incomplete."""
