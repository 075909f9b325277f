"""Exception types shared across the package."""


class HistnerError(Exception):
    """Base class for all histner errors."""


class BratParseError(HistnerError):
    """A standoff annotation line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnsupportedSpanError(HistnerError):
    """Annotation uses a feature we deliberately reject (e.g. discontinuous spans)."""


class AlignmentError(HistnerError):
    """A character span does not map cleanly onto the text or its tokens."""


class TagError(HistnerError):
    """Unknown tag string, or spans that cannot be encoded."""


class DataError(HistnerError):
    """Malformed or inconsistent input data."""


class ConfigError(HistnerError):
    """Invalid configuration value."""


class ShapeError(HistnerError):
    """Array shapes incompatible with the requested operation."""


class NonFiniteError(HistnerError):
    """A NaN or Inf value appeared where only finite values are allowed."""


class GraphError(HistnerError):
    """Computation graph misuse (e.g. running backward twice)."""


class TrainingError(HistnerError):
    """Training aborted; carries context about where it happened."""
