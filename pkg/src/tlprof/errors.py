"""Exception types shared across the package."""


class TlprofError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(TlprofError, ValueError):
    """An argument violates a documented precondition."""


class FieldFormatError(TlprofError, ValueError):
    """A field file is malformed or fails validation."""


class FieldSizeError(TlprofError, OverflowError):
    """Requested grid would exceed the platform index range."""


class PipelineError(TlprofError, RuntimeError):
    """A pipeline stage failed; carries the stage label."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
