"""Exception hierarchy shared across the toolkit.

``DataError`` subclasses signal malformed or inconsistent inputs,
``ConfigError`` signals an unusable pipeline configuration and
``NumericError`` signals a numeric breakdown (non-finite values,
degenerate matrices).  The CLI maps each branch to its own exit code.
"""


class RecselError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(RecselError):
    """The pipeline configuration is invalid or incomplete."""


class DataError(RecselError):
    """Input data violates a documented contract."""


class NumericError(RecselError):
    """A numeric computation cannot proceed (non-finite / degenerate input)."""


# ingest
class MalformedLine(DataError):
    pass


class DuplicateRating(DataError):
    pass


class OutOfScale(DataError):
    pass


class IncompleteTable(DataError):
    pass


class UnknownMeasure(DataError):
    pass


# sampling
class EmptyGraph(DataError):
    pass


# vocabulary / embedding
class EmptyCorpus(DataError):
    pass


class UnknownToken(DataError):
    pass


class ShapeMismatch(DataError):
    pass


# statistical metafeatures / baselevel
class EmptyDataset(DataError):
    pass


class NameMismatch(DataError):
    pass


class TooFewRatings(DataError):
    pass


# metalearning
class MissingMeasure(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyMetabase(DataError):
    pass


class KTooLarge(DataError):
    pass


class AlgorithmSetMismatch(DataError):
    pass


class TooFewRows(DataError):
    pass


# report
class DegenerateMatrix(NumericError):
    pass


class UnsupportedK(NumericError):
    pass


class DegenerateData(NumericError):
    pass


class IOFailure(RecselError):
    pass
