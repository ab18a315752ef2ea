"""Exception types shared across the package."""


class KwsflowError(Exception):
    """Base class for all package errors."""


class UnsupportedFormat(KwsflowError):
    """WAV file is not 16-bit PCM mono little-endian."""


class InvalidParams(KwsflowError):
    """Signal generator parameters out of range."""


class EmptySignal(KwsflowError):
    """Operation requires a nonempty signal."""


class InvalidFactor(KwsflowError):
    """Decimation factor must be a positive integer."""


class DegenerateWindow(KwsflowError):
    """Window is all zeros."""


class SignalTooShort(KwsflowError):
    """Signal shorter than one analysis frame."""


class DimensionMismatch(KwsflowError):
    """Operand shapes do not agree."""


class NegativeInput(KwsflowError):
    """Mel map requires non-negative frequency or mel value."""


class TooManyFilters(KwsflowError):
    """More mel filters than usable spectrum bins."""


class InvalidSize(KwsflowError):
    """FFT size not in the supported set."""


class ZeroReference(KwsflowError):
    """Reference spectrogram has zero norm."""


class NoFeasiblePoint(KwsflowError):
    """No candidate satisfies the selection criterion."""


class DegenerateInput(KwsflowError):
    """Corpus energy below the measurable floor."""


class ConfigInvalid(KwsflowError):
    """Flow configuration failed validation."""


class ConfigMismatch(KwsflowError):
    """Checkpoint was produced under a different configuration."""


class CheckpointCorrupt(KwsflowError):
    """Checkpoint file is unreadable or truncated."""


class ScriptExhausted(KwsflowError):
    """Scripted reasoner has no entry for this (stage, iteration)."""


class ScenarioExhausted(KwsflowError):
    """Mock adapter scenario has no report for this call."""


class SchemaViolation(KwsflowError):
    """Remote reasoner response does not match the expected schema."""


class RemoteProtocolError(KwsflowError):
    """Remote reasoner endpoint failed after bounded retries."""
