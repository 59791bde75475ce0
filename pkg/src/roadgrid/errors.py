"""Exception hierarchy shared by every roadgrid module."""


class RoadGridError(Exception):
    """Base class for all data errors raised by roadgrid."""


class OutOfBoundsError(RoadGridError, IndexError):
    pass


class InvalidDistanceError(RoadGridError, ValueError):
    pass


class InvalidCodeError(RoadGridError, ValueError):
    pass


class MisalignedOriginError(RoadGridError, ValueError):
    pass


class StorageFailureError(RoadGridError, OSError):
    pass


class CentralTileMissingError(RoadGridError, FileNotFoundError):
    pass


class DegeneratePolylineError(RoadGridError, ValueError):
    pass


class CropOutsideMapError(RoadGridError, ValueError):
    pass


class InsufficientClearanceError(RoadGridError, ValueError):
    pass


class MissingGroundTruthError(RoadGridError, KeyError):
    pass


class MissingInferenceFileError(RoadGridError, FileNotFoundError):
    pass


class ShapeMismatchError(RoadGridError, ValueError):
    pass


class NoLaneFoundError(RoadGridError):
    """Raised when the orthogonal lane-center search finds no in-lane cell."""


class TooFewPointsError(RoadGridError, ValueError):
    pass


class EmptyListError(RoadGridError, ValueError):
    pass


class FormatError(RoadGridError, ValueError):
    """A text or image file does not follow its documented format."""
