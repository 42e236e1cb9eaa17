"""Exception hierarchy shared by every module."""


class GaussRadonError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class DegenerateBasisError(GaussRadonError, ValueError):
    pass


class InconsistentOffsetError(GaussRadonError, ValueError):
    pass


class DegreeOverflowError(GaussRadonError, OverflowError):
    pass


class EngineUnavailableError(GaussRadonError):
    pass


class InsufficientGridError(GaussRadonError, ValueError):
    pass


class DesignFailureError(GaussRadonError):
    def __init__(self, message, best_condition=float("inf")):
        super().__init__(message)
        self.best_condition = best_condition


class NonRealFunctionError(GaussRadonError, ValueError):
    pass


class StageError(GaussRadonError):
    """Wraps an error raised inside a labelled pipeline stage."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


class ConfigError(Exception):
    """Malformed configuration; the CLI maps it to exit code 2."""
