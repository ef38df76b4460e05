"""Domain layer - tensors, geometry, network modules and training logic."""

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import EvalReport, NetworkConfig, SyntheticSceneSpec, TrainConfig

__all__ = [
    "EvalReport",
    "NetworkConfig",
    "PointCloud",
    "SyntheticSceneSpec",
    "TrainConfig",
]
