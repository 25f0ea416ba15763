"""Exception hierarchy shared by every stage.

The CLI maps :class:`ValidationError` (and its subclasses) to exit code 1 and
:class:`TransportError` / ``OSError`` to exit code 2.
"""


class MMKGError(Exception):
    """Base class for all package errors."""


class ValidationError(MMKGError, ValueError):
    """Input violates a documented precondition."""


class ParseError(ValidationError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class SchemaError(ValidationError):
    """Template or config schema violation."""


class UnresolvableIngredient(ValidationError):
    """Standardisation stripped the ingredient to nothing."""


class GraphError(ValidationError):
    """Unknown entity, kind mismatch or mutation of a frozen graph."""


class EmbeddingError(MMKGError):
    """Provider returned an unusable vector (wrong dim, non-finite, zero)."""


class TransportError(MMKGError):
    """Remote service unreachable or answered with an error status."""

    def __init__(self, message: str, status: int | None = None):
        self.status = status
        super().__init__(message)


class ClusteringError(ValidationError):
    """Clustering index undefined for the given labelling."""


class StageError(MMKGError):
    """Failure inside a pipeline stage; ``stage`` names which one."""

    def __init__(self, stage: str, cause: Exception, fallback=None):
        self.stage = stage
        self.cause = cause
        self.fallback = fallback
        super().__init__(f"{stage}: {cause}")
