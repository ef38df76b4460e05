"""Custom exceptions for pothole-seg.

Every exception carries a class-level ``exit_code`` used by the CLI:
2 for configuration problems, 3 for data problems, 4 for numeric failures.
"""


class PotholeSegError(Exception):
    """Base exception for all pothole-seg errors."""

    exit_code: int = 1

    def __init__(self, message: str, **kwargs: object) -> None:
        super().__init__(message)
        for key, value in kwargs.items():
            setattr(self, key, value)


class ConfigError(PotholeSegError):
    """Invalid run, network, training or scene configuration."""

    exit_code = 2


class DataError(PotholeSegError):
    """Unreadable, malformed or inconsistent data."""

    exit_code = 3


class ParseError(DataError):
    """Error parsing a point-cloud file."""
    pass


class CloudValidationError(DataError):
    """Point cloud violates its structural invariants."""
    pass


class CloudTooSmallError(DataError):
    """Cloud has too few points for the configured sampling ladder."""
    pass


class ClassCountMismatchError(DataError):
    """Dataset labels do not fit the network's class count."""
    pass


class CheckpointError(DataError):
    """Checkpoint file is corrupt, truncated or incompatible."""
    pass


class CheckpointVersionError(CheckpointError):
    """Checkpoint magic or format version is not supported."""
    pass


class PlacementError(DataError):
    """Synthetic potholes could not be placed without overlap."""
    pass


class GeometryError(DataError):
    """Invalid geometric query (e.g. more neighbours than points)."""
    pass


class NumericError(PotholeSegError):
    """Numeric failure during computation."""

    exit_code = 4


class AutodiffError(NumericError):
    """Tensor engine misuse."""
    pass


class DimensionError(AutodiffError):
    """Operand shapes are incompatible."""
    pass


class BroadcastError(DimensionError):
    """Operand shapes cannot be broadcast together."""
    pass


class GatherIndexError(AutodiffError):
    """Row index outside the source tensor."""
    pass


class TapeError(AutodiffError):
    """Backward pass requested on an invalid or consumed tape."""
    pass


class NonFiniteLossError(NumericError):
    """Training produced a NaN or infinite loss."""
    pass
