"""Exception types shared across the toolkit."""


class ParceError(Exception):
    """Base class for all toolkit errors."""


class InvalidArgumentError(ParceError, ValueError):
    """An argument is outside its documented domain."""


class InvalidRecordError(ParceError, ValueError):
    """A sample record violates a schema or probability invariant."""


class InvalidStatsError(ParceError, ValueError):
    """Per-class loss statistics are unusable (e.g. non-positive stddev)."""


class InsufficientDataError(ParceError, ValueError):
    """Not enough samples to fit or calibrate."""


class TrainingFailureError(ParceError, RuntimeError):
    """Model training diverged (non-finite loss)."""


class PipelineStageError(ParceError, RuntimeError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage, cause):
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
