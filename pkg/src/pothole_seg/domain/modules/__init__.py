"""Network building blocks and the assembled segmentation network."""

from pothole_seg.domain.modules.feature_augmenter import FeatureAugmenterBlock
from pothole_seg.domain.modules.local_context import (
    EncoderLayer,
    LocalContextBlock,
    build_encoder_layer,
    encoder_layer,
    local_context_forward,
    neighbor_features,
)
from pothole_seg.domain.modules.network import (
    ForwardResult,
    SegmentationNetwork,
    StageRecord,
    build,
    expected_parameter_count,
)

__all__ = [
    "EncoderLayer",
    "FeatureAugmenterBlock",
    "ForwardResult",
    "LocalContextBlock",
    "SegmentationNetwork",
    "StageRecord",
    "build",
    "build_encoder_layer",
    "encoder_layer",
    "expected_parameter_count",
    "local_context_forward",
    "neighbor_features",
]
