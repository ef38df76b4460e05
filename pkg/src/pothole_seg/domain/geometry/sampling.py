"""Random subsampling and nearest-neighbour upsampling."""

from __future__ import annotations

import numpy as np

from pothole_seg.domain.autodiff import Tensor, gather_rows
from pothole_seg.domain.geometry.neighbors import nearest_index
from pothole_seg.domain.geometry.point_cloud import PointCloud, SamplingTrace
from pothole_seg.shared.exceptions import GeometryError
from pothole_seg.shared.types import IndexArray


def coarse_count(n: int, ratio: int) -> int:
    """Number of points kept when sampling ``n`` points by ``ratio`` (ceil)."""
    return -(-n // ratio)


def subsample_with_kept(cloud: PointCloud, kept: IndexArray) -> tuple[PointCloud, SamplingTrace]:
    """Restrict ``cloud`` to an explicit kept set and build the upsampling map.

    Raises:
        GeometryError: If kept indices repeat or fall outside the cloud
    """
    kept = np.asarray(kept, dtype=np.int64)
    n = cloud.num_points
    if kept.ndim != 1 or kept.size < 1:
        raise GeometryError(f"Kept set must be a non-empty 1-d index array, got {kept.shape}")
    if kept.min() < 0 or kept.max() >= n:
        raise GeometryError(f"Kept index outside [0, {n})", points=n)
    if np.unique(kept).size != kept.size:
        raise GeometryError("Kept indices must be unique")
    coarse = cloud.subset(kept)
    upmap = nearest_index(cloud.positions, coarse.positions)
    return coarse, SamplingTrace(kept=kept, upmap=upmap)


def random_subsample(
    cloud: PointCloud,
    ratio: int,
    rng: np.random.Generator,
) -> tuple[PointCloud, SamplingTrace]:
    """Keep ``ceil(N/ratio)`` distinct points chosen uniformly (seeded shuffle prefix).

    ``ratio == 1`` keeps every point in its original order.
    """
    if ratio < 1:
        raise GeometryError(f"Sampling ratio must be >= 1, got {ratio}", ratio=ratio)
    n = cloud.num_points
    if ratio == 1:
        kept = np.arange(n, dtype=np.int64)
    else:
        kept = rng.permutation(n)[: coarse_count(n, ratio)].astype(np.int64)
    return subsample_with_kept(cloud, kept)


def nn_upsample(coarse_features: Tensor, trace: SamplingTrace, fine_count: int) -> Tensor:
    """Copy each coarse feature row to the fine points nearest to it.

    Raises:
        GeometryError: If the trace does not describe ``fine_count`` fine points
            over the given coarse rows
    """
    if trace.fine_count != fine_count:
        raise GeometryError(
            f"Upsampling map covers {trace.fine_count} points, expected {fine_count}"
        )
    if trace.upmap.size and trace.upmap.max() >= coarse_features.shape[0]:
        raise GeometryError(
            f"Upsampling map refers to coarse row {int(trace.upmap.max())} "
            f"of {coarse_features.shape[0]}"
        )
    return gather_rows(coarse_features, trace.upmap)
