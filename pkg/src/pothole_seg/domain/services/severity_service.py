"""Pothole severity estimates from a segmented cloud."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from pothole_seg.domain.geometry import PointCloud, knn
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import GeometryError
from pothole_seg.shared.types import FloatArray, IndexArray, SemanticClass

logger = get_logger(__name__)


@dataclass(frozen=True)
class PotholeRegion:
    """One connected group of pothole points."""
    region_id: int
    point_count: int
    centroid: tuple[float, float, float]
    area: float        # m^2
    max_depth: float   # m below the road plane
    mean_depth: float
    volume: float      # m^3


@dataclass(frozen=True)
class SeverityReport:
    plane: tuple[float, float, float]  # z = a*x + b*y + c
    footprint_area: float
    regions: list[PotholeRegion] = field(default_factory=list)

    @property
    def total_volume(self) -> float:
        return float(sum(r.volume for r in self.regions))

    def to_dict(self) -> dict[str, Any]:
        return {
            "plane": list(self.plane),
            "footprint_area": self.footprint_area,
            "total_volume": self.total_volume,
            "regions": [asdict(r) for r in self.regions],
        }


def fit_road_plane(positions: FloatArray) -> tuple[float, float, float]:
    """Least-squares plane ``z = a*x + b*y + c`` through ``positions``.

    Raises:
        GeometryError: With fewer than three points
    """
    if positions.shape[0] < 3:
        raise GeometryError(f"Plane fit needs at least 3 points, got {positions.shape[0]}")
    design = np.column_stack([positions[:, 0], positions[:, 1], np.ones(positions.shape[0])])
    (a, b, c), *_ = np.linalg.lstsq(design, positions[:, 2], rcond=None)
    return float(a), float(b), float(c)


def connected_regions(positions: FloatArray, k: int, link_distance: float) -> list[IndexArray]:
    """Components of the k-nearest-neighbour graph with edges no longer than ``link_distance``.

    Components are ordered by their smallest member index.
    """
    n = positions.shape[0]
    if n == 0:
        return []
    parent = np.arange(n)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = int(parent[i])
        return i

    nbrs = knn(positions, min(k, n)).indices
    dist = np.linalg.norm(positions[nbrs] - positions[:, None, :], axis=2)
    for i, j in zip(*np.nonzero(dist <= link_distance), strict=True):
        root_a, root_b = find(int(i)), find(int(nbrs[i, j]))
        if root_a != root_b:
            parent[max(root_a, root_b)] = min(root_a, root_b)

    roots = np.array([find(i) for i in range(n)])
    return [np.flatnonzero(roots == r) for r in np.unique(roots)]


def assess_severity(
    cloud: PointCloud,
    predictions: npt.ArrayLike,
    k: int = 8,
    link_distance: float | None = None,
    min_points: int = 5,
    pothole_class: int = SemanticClass.POTHOLE,
) -> SeverityReport:
    """Group predicted pothole points into regions and measure each one.

    Area is the region's share of points times the xy bounding-box area of the
    cloud; volume is area times mean depth below the plane fitted to road points.
    ``link_distance`` defaults to 2.5 times the median nearest-neighbour
    spacing of the pothole points. Regions smaller than ``min_points`` are dropped.
    """
    logger.trace(f"Starting {__name__}...")
    labels = np.asarray(predictions, dtype=np.int64)
    positions = cloud.positions
    pothole = labels == pothole_class
    plane = fit_road_plane(positions[~pothole] if (~pothole).sum() >= 3 else positions)
    span = positions[:, :2].max(axis=0) - positions[:, :2].min(axis=0)
    footprint = float(span[0] * span[1])
    report = SeverityReport(plane=plane, footprint_area=footprint)

    members = np.flatnonzero(pothole)
    if members.size == 0:
        logger.debug("No pothole points predicted")
        return report

    pts = positions[members]
    if link_distance is None:
        if members.size > 1:
            nearest = knn(pts, 2).indices[:, 1]
            spacing = float(np.median(np.linalg.norm(pts - pts[nearest], axis=1)))
        else:
            spacing = 0.0
        link_distance = 2.5 * spacing

    a, b, c = plane
    depth = (a * pts[:, 0] + b * pts[:, 1] + c) - pts[:, 2]
    for group in connected_regions(pts, k, link_distance):
        if group.size < min_points:
            continue
        region_depth = np.clip(depth[group], 0.0, None)
        area = footprint * group.size / cloud.num_points
        centroid = pts[group].mean(axis=0)
        report.regions.append(
            PotholeRegion(
                region_id=len(report.regions),
                point_count=int(group.size),
                centroid=(float(centroid[0]), float(centroid[1]), float(centroid[2])),
                area=area,
                max_depth=float(region_depth.max()),
                mean_depth=float(region_depth.mean()),
                volume=area * float(region_depth.mean()),
            )
        )
    logger.info(f"Found {len(report.regions)} pothole regions, total volume {report.total_volume:.4g} m^3")
    return report
