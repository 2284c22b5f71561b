"""Shared exception types."""


class RegosenseError(Exception):
    """Base class for all package errors."""


class SpecificationError(RegosenseError):
    """A field / protocol / session specification is malformed."""


class DomainError(RegosenseError):
    """An input falls outside the valid domain of an operation."""


class AnalysisError(RegosenseError):
    """A curve does not support the requested analysis."""


class SingularityError(RegosenseError):
    """Leg configuration too close to singular for force estimation."""

    def __init__(self, det: float, floor: float):
        self.det = det
        self.floor = floor
        super().__init__(f"|det J| = {abs(det):.3e} below singularity floor {floor:.3e}")


class StateError(RegosenseError):
    """Operation requested in a state that cannot support it."""


class ConflictError(RegosenseError):
    """A decision references a stale suggestion round."""


class ExhaustedError(RegosenseError):
    """All candidate locations have already been measured."""


class CorruptionError(RegosenseError):
    """Event log is malformed (gap, duplicate, or missing genesis)."""


class NotFoundError(RegosenseError):
    """Unknown session or measurement id."""
