"""Exception types shared across the pipeline."""


class ClicksimError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRecord(ClicksimError):
    """A log line that could not be parsed into a record."""

    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ConflictingSegmentWarning(UserWarning):
    """Records within one session disagree on segment fields."""


class UnobservedEdge(ClicksimError):
    """Smoothed probability requested for a transition never observed."""


class InvalidWeight(ClicksimError):
    """Edge weight outside (0, 1] or otherwise unusable."""


class DuplicateNode(ClicksimError):
    """Node insertion collides with an existing node id."""


class SentinelViolation(ClicksimError):
    """An edge would enter the start sentinel or leave the end sentinel."""


class MissingEmbedding(ClicksimError):
    """A node required by the predictor has no embedding vector."""


class DimensionMismatch(ClicksimError):
    """Vector length differs from the configured dimension."""


class RemoteUnavailable(ClicksimError):
    """Remote embedding endpoint failed after all retries."""


class DegenerateDataset(ClicksimError):
    """Training data unusable: no positives, or single-class validation."""


class LengthMismatch(ClicksimError):
    """Paired metric inputs have different lengths."""


class EmptyInput(ClicksimError):
    """Metric requested over zero samples."""


class SingleClass(ClicksimError):
    """AUC requested but labels contain only one class."""


class UnknownField(ClicksimError):
    """Conversion rule references a field absent from every node."""


class ConfigError(ClicksimError):
    """Invalid or unknown configuration keys/values."""
