"""Exception types raised across the package."""


class RabiSpectraError(Exception):
    """Base class for all package errors."""


class BlockedRecurrence(RabiSpectraError):
    """The Frobenius recurrence hit a vanishing denominator (integer exponent gap)."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"recurrence blocked at index {index}")


class NonFiniteCoefficient(RabiSpectraError):
    pass


class OutsideDisk(RabiSpectraError):
    pass


class NotConverged(RabiSpectraError):
    pass


class WrongBeta(RabiSpectraError):
    pass


class NotTruncated(RabiSpectraError):
    pass


class DegenerateMap(RabiSpectraError):
    """z = lambda (2y - 1) cannot be inverted at lambda = 0."""


class MuZero(RabiSpectraError):
    pass


class NotEntire(RabiSpectraError):
    pass


class SamplePointSingular(RabiSpectraError):
    pass


class IntegerX(RabiSpectraError):
    pass


class LambdaZero(RabiSpectraError):
    pass


class NotOnJuddSet(RabiSpectraError):
    pass


class Unclassifiable(RabiSpectraError):
    pass


class CurveCountMismatch(RabiSpectraError):
    pass


class GridTooCoarse(UserWarning):
    """Two roots may share a grid cell; the cell was rescanned with a finer step."""
