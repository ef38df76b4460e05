"""Geometric operators on point sets."""

from pothole_seg.domain.geometry.neighbors import (
    centroid_offset,
    knn,
    nearest_index,
    relative_neighbor_encoding,
    squared_distances,
)
from pothole_seg.domain.geometry.point_cloud import NeighborIndex, PointCloud, SamplingTrace
from pothole_seg.domain.geometry.sampling import (
    coarse_count,
    nn_upsample,
    random_subsample,
    subsample_with_kept,
)

__all__ = [
    "NeighborIndex",
    "PointCloud",
    "SamplingTrace",
    "centroid_offset",
    "coarse_count",
    "knn",
    "nearest_index",
    "nn_upsample",
    "random_subsample",
    "relative_neighbor_encoding",
    "squared_distances",
    "subsample_with_kept",
]
