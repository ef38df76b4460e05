"""Core type definitions used throughout the package."""

from enum import Enum
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

# Array aliases
FloatArray: TypeAlias = npt.NDArray[np.float64]
IndexArray: TypeAlias = npt.NDArray[np.int64]


class Mode(str, Enum):
    """Forward-pass mode."""
    TRAIN = "train"
    INFER = "infer"


class CloudFormat(str, Enum):
    """Supported labeled point-cloud file formats."""
    PLY = "ply"    # ascii ply 1.0
    XYZL = "xyzl"  # whitespace separated x y z [f...] label

    @classmethod
    def from_path(cls, path: object) -> "CloudFormat":
        """Infer the format from a file suffix (``.ply`` or anything else)."""
        suffix = str(path).rsplit(".", 1)[-1].lower()
        return cls.PLY if suffix == "ply" else cls.XYZL


class ClassWeighting(str, Enum):
    """Cross-entropy class weighting strategies."""
    NONE = "none"
    INVERSE_FREQUENCY = "inverse_frequency"


class SemanticClass(int, Enum):
    """Class ids of the two-class road task."""
    ROAD = 0
    POTHOLE = 1
