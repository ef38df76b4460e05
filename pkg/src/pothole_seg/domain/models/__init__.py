"""Domain models."""

from pothole_seg.domain.models.config import NetworkConfig, SyntheticSceneSpec, TrainConfig
from pothole_seg.domain.models.eval_report import EvalReport

__all__ = [
    "EvalReport",
    "NetworkConfig",
    "SyntheticSceneSpec",
    "TrainConfig",
]
