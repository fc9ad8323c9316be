"""Exception types raised across rejectlab."""


class RejectLabError(Exception):
    """Base class for all rejectlab errors."""


class DimensionMismatchError(RejectLabError, ValueError):
    """Two inputs that must share a dimensionality do not."""


class DegenerateMetricError(RejectLabError, ValueError):
    """A metric factor has zero trace and cannot be normalized."""


class DataError(RejectLabError, ValueError):
    """Malformed or unusable input data."""


class StratificationError(DataError):
    """A class has fewer members than the requested number of folds."""


class ModelStructureError(RejectLabError, ValueError):
    """The prototype set cannot support the requested computation."""


class TrainingDivergenceError(RejectLabError, RuntimeError):
    """Training produced non-finite parameters."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"training diverged at epoch {epoch}")


class UnsupportedMeasureError(RejectLabError, ValueError):
    """A certainty measure or curve metric was paired with an incompatible input."""
