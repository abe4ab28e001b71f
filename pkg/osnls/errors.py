"""Named failures raised by the solver, the verifiers and the experiment runners."""
from __future__ import annotations


class OsnlsError(RuntimeError):
    """Base class; messages carry the offending values."""


class InvalidParamsError(OsnlsError):
    pass


class OverflowGuardError(OsnlsError):
    """4π|u|² crossed the overflow guard; the field is treated as blown up."""

    def __init__(self, message: str, exponent: float = float("nan")) -> None:
        super().__init__(message)
        self.exponent = exponent


class DegenerateInputError(OsnlsError):
    pass


class HypothesisViolatedError(OsnlsError):
    pass


class ThresholdViolatedError(OsnlsError):
    pass


class InsufficientFramesError(OsnlsError):
    pass


class ResolutionTooCoarseError(OsnlsError):
    pass


class SamplingTooCoarseError(OsnlsError):
    pass


class MassBoundViolatedError(OsnlsError):
    pass


class SupercriticalInitialDataError(OsnlsError):
    pass


class ConfigError(OsnlsError):
    pass


class MissingReportError(OsnlsError):
    pass


class CheckpointFormatError(OsnlsError):
    pass


class NumericalFailureError(OsnlsError):
    """Every run of a command failed numerically."""
