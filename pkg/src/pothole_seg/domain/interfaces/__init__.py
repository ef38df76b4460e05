"""Domain interfaces."""

from pothole_seg.domain.interfaces.local_extractor import ExtractorFactory, LocalFeatureExtractor

__all__ = [
    "ExtractorFactory",
    "LocalFeatureExtractor",
]
