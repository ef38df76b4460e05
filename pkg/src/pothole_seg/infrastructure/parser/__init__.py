"""Point-cloud file parsers."""

from pothole_seg.infrastructure.parser.cloud_reader import CloudReader, read_cloud

__all__ = ["CloudReader", "read_cloud"]
