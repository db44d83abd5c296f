"""Exception hierarchy shared by all fmdiag modules."""


class FMDiagError(Exception):
    """Base class for domain errors (reported by the CLI with exit code 1)."""


class ModelError(FMDiagError, ValueError):
    """A feature model or test suite violates a structural rule."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        if line is not None and column is not None:
            message = f"line {line}, column {column}: {message}"
        elif line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(ModelError):
    """Malformed input text."""
