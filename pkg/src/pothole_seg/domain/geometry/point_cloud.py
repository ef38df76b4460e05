"""Point-cloud domain types."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pothole_seg.shared.exceptions import CloudValidationError
from pothole_seg.shared.types import FloatArray, IndexArray


@dataclass
class PointCloud:
    """N points with xyz coordinates (meters), d feature channels and optional labels.

    ``features`` may have zero columns (position-only clouds).
    """
    positions: FloatArray
    features: FloatArray = field(default_factory=lambda: np.zeros((0, 0)))
    labels: IndexArray | None = None

    def __post_init__(self) -> None:
        self.positions = np.asarray(self.positions, dtype=np.float64)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise CloudValidationError(f"Positions must be [N,3], got {self.positions.shape}")
        n = self.positions.shape[0]
        if n < 1:
            raise CloudValidationError("Point cloud must contain at least one point")
        if not np.all(np.isfinite(self.positions)):
            bad = int(np.flatnonzero(~np.all(np.isfinite(self.positions), axis=1))[0])
            raise CloudValidationError(f"Non-finite coordinate at point {bad}", point=bad)

        features = np.asarray(self.features, dtype=np.float64)
        if features.size == 0:
            features = np.zeros((n, 0), dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n:
            raise CloudValidationError(
                f"Features must be [{n},d], got {features.shape}", expected_rows=n
            )
        self.features = features

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (n,):
                raise CloudValidationError(f"Labels must be [{n}], got {labels.shape}")
            if labels.size and not np.array_equal(labels, np.round(labels)):
                raise CloudValidationError("Labels must be integer class ids")
            if labels.size and labels.min() < 0:
                raise CloudValidationError(f"Negative label id {int(labels.min())}")
            self.labels = labels.astype(np.int64)

    @property
    def num_points(self) -> int:
        return int(self.positions.shape[0])

    @property
    def feature_dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def validate_labels(self, num_classes: int) -> None:
        """Check every label is in ``[0, num_classes)``.

        Raises:
            CloudValidationError: On an out-of-range label
        """
        if self.labels is None:
            return
        if self.labels.size and self.labels.max() >= num_classes:
            raise CloudValidationError(
                f"Label id {int(self.labels.max())} outside [0, {num_classes})",
                num_classes=num_classes,
            )

    def with_labels(self, labels: IndexArray) -> PointCloud:
        """Copy of this cloud carrying ``labels``."""
        return PointCloud(self.positions.copy(), self.features.copy(), np.asarray(labels))

    def subset(self, indices: IndexArray) -> PointCloud:
        """Cloud restricted to ``indices`` (in the given order)."""
        labels = None if self.labels is None else self.labels[indices]
        return PointCloud(self.positions[indices], self.features[indices], labels)

    def permuted(self, perm: IndexArray) -> PointCloud:
        """Cloud whose i-th point is this cloud's ``perm[i]``-th point."""
        return self.subset(np.asarray(perm, dtype=np.int64))

    def pothole_fraction(self, pothole_class: int = 1) -> float:
        if self.labels is None:
            return 0.0
        return float(np.mean(self.labels == pothole_class))


@dataclass(frozen=True)
class NeighborIndex:
    """Per-point indices of the k nearest points, nearest first.

    Distance ties, duplicates of the point itself included, are ordered by
    index, so row ``i`` starts with ``i`` only when no lower-index duplicate exists.
    """
    indices: IndexArray

    def __post_init__(self) -> None:
        if self.indices.ndim != 2:
            raise CloudValidationError(f"Neighbor indices must be [N,k], got {self.indices.shape}")

    @property
    def k(self) -> int:
        return int(self.indices.shape[1])

    @property
    def num_points(self) -> int:
        return int(self.indices.shape[0])


@dataclass(frozen=True)
class SamplingTrace:
    """Record of one random-sampling step.

    ``kept`` maps each coarse point to its fine source index; ``upmap`` maps
    each fine point to its nearest kept coarse point.
    """
    kept: IndexArray
    upmap: IndexArray

    @property
    def coarse_count(self) -> int:
        return int(self.kept.shape[0])

    @property
    def fine_count(self) -> int:
        return int(self.upmap.shape[0])
