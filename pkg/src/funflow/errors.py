"""Exception hierarchy. Every error carries a stable machine-readable code."""


class FunflowError(Exception):
    """Base class; ``code`` is stable across releases and safe to parse."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class FormatError(FunflowError):
    code = "format"


class ParseError(FunflowError):
    code = "parse"


class DimensionError(FunflowError):
    code = "dimension"


class EmptyDatasetError(FunflowError):
    code = "empty-dataset"


class MissingResponseError(FunflowError):
    code = "missing-response"


class RankError(FunflowError):
    code = "rank"


class EmptyNeighborhoodError(FunflowError):
    code = "empty-neighborhood"


class DegenerateCdfError(FunflowError):
    code = "degenerate-cdf"


class DivergenceError(FunflowError):
    code = "divergence"


class SnapshotError(FunflowError):
    code = "snapshot"


class ConfigError(FunflowError):
    code = "config"
