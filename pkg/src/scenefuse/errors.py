"""Exception hierarchy.

Three broad families map onto CLI exit codes: configuration problems (2),
backend/transport problems (3), and data problems (4).
"""


class ScenefuseError(Exception):
    """Base class for all package errors."""


class ConfigError(ScenefuseError):
    """Bad or missing configuration."""


class DataError(ScenefuseError):
    """Invalid, empty, or out-of-range input data."""


class EmptyTranscript(DataError):
    """No dialogue line could be parsed from the document."""


class NoCues(DataError):
    """No caption cue could be parsed from the document."""


class RangeOutOfBounds(DataError):
    """Line span does not fit inside the transcript."""


class InvalidCount(DataError):
    """Speaker counts outside 1 <= n <= N."""


class TooLarge(DataError):
    """Instance exceeds the brute-force size guard."""


class EmptySequence(DataError):
    """Alignment requires at least one element on each side."""


class UncoveredScene(DataError):
    """A scene has no caption cue matched to any of its lines."""


class LengthMismatch(DataError):
    """Labelings being compared have different lengths."""


class ZeroVariance(DataError):
    """Welch statistics are undefined when both samples have zero variance."""


class NoFactsAfterFiltering(DataError):
    """Every extracted fact was removed by the uninformative-fact filter."""


class BudgetTooSmall(DataError):
    """Fusion context budget cannot fit even one scene summary."""


class BackendError(ScenefuseError):
    """Base class for remote-generation failures."""


class BackendUnavailable(BackendError):
    """Transport kept failing after the configured retries."""


class AuthError(BackendError):
    """The service rejected our credentials."""


class QuotaExceeded(BackendError):
    """The service reported quota exhaustion; not retryable."""


class EmptyCompletion(BackendError):
    """The backend returned a blank completion where text was required."""
