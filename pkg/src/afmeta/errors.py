"""Exception types shared across the toolkit."""


class MetaEvalError(Exception):
    """Base class for every error raised by afmeta."""


class MissingColumn(MetaEvalError):
    """A required column is absent from an input file header."""


class MalformedSeverity(MetaEvalError):
    """A severity token is not one of the known values."""


class EmptyFile(MetaEvalError):
    """An input file contains no data rows."""


class DuplicateCell(MetaEvalError):
    """A score file carries more than one score for the same (system, segment)."""


class NonNumericScore(MetaEvalError):
    """A score cannot be parsed as a finite number."""


class UnalignedIds(MetaEvalError):
    """A (system, segment) cell required by the evaluation set is missing."""


class LengthMismatch(MetaEvalError):
    """Paired score vectors have different lengths."""


class DomainError(MetaEvalError):
    """A numeric argument is outside the supported domain."""


class ZeroVarianceSystem(MetaEvalError):
    """Welch's ANOVA requires every system to have nonzero score variance."""


class NoUsablePairs(MetaEvalError):
    """Every system pair is tied on the human scores, so PA is undefined."""


class NoQualifyingPairs(MetaEvalError):
    """No candidate pair holds one aspect fixed while varying the other."""
