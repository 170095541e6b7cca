"""Exception types shared across the toolkit."""


class StreamResError(Exception):
    """Base class for every error raised by streamres."""


class InvalidSpec(StreamResError, ValueError):
    pass


class InvalidConfig(StreamResError, ValueError):
    pass


class MissingFile(StreamResError, FileNotFoundError):
    pass


class RowError(StreamResError, ValueError):
    """A malformed input row. ``line`` is 1-based and counts the header."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaMismatch(RowError):
    pass


class NonFiniteFeature(RowError):
    pass


class NonPositiveWeight(RowError):
    pass


class UOutOfRange(StreamResError, ValueError):
    pass


class KExceedsPopulation(StreamResError, ValueError):
    pass


class EmptyPopulation(StreamResError, ValueError):
    pass


class EOutOfRange(StreamResError, ValueError):
    pass


class NoActiveStreams(StreamResError, ValueError):
    pass


class BudgetTooSmall(StreamResError, ValueError):
    pass


class DimensionMismatch(StreamResError, ValueError):
    pass


class QOutOfRange(StreamResError, ValueError):
    pass


class DimensionOutOfRange(StreamResError, IndexError):
    pass


class WindowTooSmall(StreamResError, ValueError):
    pass


class MismatchedWindow(StreamResError, ValueError):
    pass


class DegenerateCluster(StreamResError, ValueError):
    pass


class NoLabels(StreamResError, ValueError):
    pass


class AlignmentMismatch(StreamResError, ValueError):
    pass


class InvalidIRI(StreamResError, ValueError):
    pass
