"""Exception types shared across the package."""


class TimexError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(TimexError, ValueError):
    """An argument violates a documented precondition."""


class DataFormatError(TimexError):
    """A dataset file is malformed; the message names the offending record."""


class ConfigurationError(TimexError):
    """An analysis configuration is inconsistent with the dataset or itself."""


class ModelStartupError(TimexError):
    """An external model process failed to spawn or complete its handshake."""


class ProtocolError(TimexError):
    """The model wire protocol was violated.

    Carries the raw offending message, when one exists, in ``raw``.
    """

    def __init__(self, message: str, raw: str | None = None):
        super().__init__(message)
        self.raw = raw


class TuningError(TimexError):
    """Noise-level tuning failed to bracket or converge; carries a trace."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []


class GenerationError(TimexError):
    """Synthetic data or ground-truth generation could not satisfy its invariants."""


class AnalysisError(TimexError):
    """A test could not be completed; carries the id of the failing test node."""

    def __init__(self, message: str, node_id: str | None = None):
        super().__init__(message)
        self.node_id = node_id
