"""Application facades."""

from pothole_seg.application.facades.segmentation_facade import (
    AblationOutcome,
    SegmentationFacade,
    SegmentOutcome,
    TrainingOutcome,
)

__all__ = [
    "AblationOutcome",
    "SegmentOutcome",
    "SegmentationFacade",
    "TrainingOutcome",
]
