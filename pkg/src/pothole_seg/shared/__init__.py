"""Shared utilities and types."""

from pothole_seg.shared.exceptions import (
    CheckpointError,
    CloudValidationError,
    ConfigError,
    DataError,
    DimensionError,
    NumericError,
    ParseError,
    PotholeSegError,
)
from pothole_seg.shared.types import ClassWeighting, CloudFormat, Mode, SemanticClass

__all__ = [
    "CheckpointError",
    "ClassWeighting",
    "CloudFormat",
    "CloudValidationError",
    "ConfigError",
    "DataError",
    "DimensionError",
    "Mode",
    "NumericError",
    "ParseError",
    "PotholeSegError",
    "SemanticClass",
]
