"""Application layer."""

from pothole_seg.application.facades.segmentation_facade import SegmentationFacade

__all__ = [
    "SegmentationFacade",
]
