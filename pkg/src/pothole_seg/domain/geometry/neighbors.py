"""Exact nearest-neighbour queries and neighbourhood descriptors."""

from __future__ import annotations

import numpy as np

from pothole_seg.domain.geometry.point_cloud import NeighborIndex
from pothole_seg.shared.constants import (
    CENTROID_CHANNELS,
    DISTRIBUTION_CHANNEL,
    ENCODING_CHANNELS,
    OFFSET_CHANNELS,
    OFFSET_NORM_CHANNEL,
)
from pothole_seg.shared.exceptions import GeometryError
from pothole_seg.shared.types import FloatArray, IndexArray

# Rows of the distance matrix materialized at once.
_CHUNK_ROWS = 256


def squared_distances(queries: FloatArray, points: FloatArray) -> FloatArray:
    """Exact squared Euclidean distances ``[q, n]`` between two point sets."""
    diff = queries[:, None, :] - points[None, :, :]
    return np.sum(diff * diff, axis=-1)


def knn(positions: FloatArray, k: int) -> NeighborIndex:
    """Brute-force k nearest neighbours of every point.

    Rows are sorted by nondecreasing distance; equal distances keep the lower
    index first. A point is its own first neighbour unless a duplicate of it
    has a lower index, in which case the duplicate comes first.

    Raises:
        GeometryError: If ``k`` is not in ``[1, N]``
    """
    positions = np.asarray(positions, dtype=np.float64)
    n = positions.shape[0]
    if not 1 <= k <= n:
        raise GeometryError(f"k={k} neighbours requested from {n} points", k=k, points=n)

    indices = np.empty((n, k), dtype=np.int64)
    for start in range(0, n, _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, n)
        dist = squared_distances(positions[start:stop], positions)
        indices[start:stop] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return NeighborIndex(indices)


def nearest_index(queries: FloatArray, points: FloatArray) -> IndexArray:
    """Index of the nearest ``points`` row for every query (lowest index on ties)."""
    result = np.empty(queries.shape[0], dtype=np.int64)
    for start in range(0, queries.shape[0], _CHUNK_ROWS):
        stop = min(start + _CHUNK_ROWS, queries.shape[0])
        result[start:stop] = np.argmin(squared_distances(queries[start:stop], points), axis=1)
    return result


def centroid_offset(positions: FloatArray, nbrs: NeighborIndex) -> tuple[FloatArray, FloatArray]:
    """Neighbourhood centroids and the distribution characteristic.

    Returns:
        Tuple of (centroids ``[N,3]``, L ``[N,1]``) where L is the distance
        from each point to the centroid of its neighbourhood.
    """
    centroids = positions[nbrs.indices].mean(axis=1)
    spread = np.linalg.norm(positions - centroids, axis=1, keepdims=True)
    return centroids, spread


def relative_neighbor_encoding(positions: FloatArray, nbrs: NeighborIndex) -> FloatArray:
    """Eight-channel geometric encoding of every (point, neighbour) pair.

    Channel layout: neighbour offset from the centroid (0-2), centroid
    coordinates (3-5), offset norm (6), distribution characteristic L (7).
    """
    centroids, spread = centroid_offset(positions, nbrs)
    n, k = nbrs.indices.shape
    offsets = positions[nbrs.indices] - centroids[:, None, :]
    encoding = np.empty((n, k, ENCODING_CHANNELS), dtype=np.float64)
    encoding[:, :, OFFSET_CHANNELS] = offsets
    encoding[:, :, CENTROID_CHANNELS] = centroids[:, None, :]
    encoding[:, :, OFFSET_NORM_CHANNEL] = np.linalg.norm(offsets, axis=2)
    encoding[:, :, DISTRIBUTION_CHANNEL] = spread
    return encoding
