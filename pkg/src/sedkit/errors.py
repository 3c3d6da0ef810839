"""Exception hierarchy shared by all sedkit modules.

Every error raised by the toolkit derives from :class:`SedkitError` so the
CLI can map error classes onto exit codes in one place.
"""


class SedkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(SedkitError):
    """Invalid configuration, unknown names, bad hyperparameters."""


# ---------------------------------------------------------------------------
# corpus loading / validation

class DataError(SedkitError):
    """Base class for dataset ingestion and validation failures."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateIdError(DataError):
    def __init__(self, message_id, line=None):
        loc = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate message id {message_id!r}{loc}")
        self.message_id = message_id


class EmptyCorpusError(DataError):
    """A corpus with zero messages is invalid."""


class InvalidPolicyError(DataError):
    """Block-split policy with non-positive size or more blocks than messages."""


class RowCountMismatchError(DataError):
    """External embedding file row count differs from corpus size."""


class RaggedDimensionsError(DataError):
    """External embedding file rows have inconsistent dimensions."""


class UnknownMessageIdError(DataError):
    """External embedding file references an id not present in the corpus."""


# ---------------------------------------------------------------------------
# preprocessing

class EmptyVocabularyError(SedkitError):
    """No token survives min_count / stopword filtering."""


class DimensionMismatchError(SedkitError):
    """Semantic vectors do not align 1:1 with corpus messages."""


# ---------------------------------------------------------------------------
# detectors

class DetectorError(SedkitError):
    """Base class for failures inside detection algorithms."""


class InvalidHyperparameterError(DetectorError):
    pass


class KTooLargeError(DetectorError):
    pass


class ZeroVectorsError(DetectorError):
    """All clustering inputs are zero vectors and k > 1."""


class NoSupportedTokensError(DetectorError):
    """Document has no token covered by the embedding table."""


class EmptyGraphError(DetectorError):
    """Graph operation requires at least one edge."""


class PartitionMismatchError(DetectorError):
    """Partition does not cover exactly the graph's node set."""


# ---------------------------------------------------------------------------
# metrics

class MetricInputError(SedkitError):
    pass


class LengthMismatchError(MetricInputError):
    pass


class EmptyInputError(MetricInputError):
    pass


class UnlabeledCorpusError(MetricInputError):
    pass


class CoverageMismatchError(MetricInputError):
    """Assignment does not cover the corpus exactly once."""


# ---------------------------------------------------------------------------
# pipeline

class LifecycleViolation(SedkitError):
    """Pipeline phase invoked out of order."""


class DuplicateNameError(SedkitError):
    """Detector name already present in the registry."""


class PhaseError(SedkitError):
    """Wraps a component error with the pipeline phase it occurred in."""

    def __init__(self, phase, cause):
        super().__init__(f"phase {phase!r}: {cause}")
        self.phase = phase
        self.cause = cause
