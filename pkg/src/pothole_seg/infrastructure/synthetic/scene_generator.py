"""Procedural road patches with cosine-bowl potholes.

Surface height is a sum of low-frequency sine waves scaled by ``roughness``.
Each pothole subtracts ``D * (1 + cos(pi * r / R)) / 2`` inside its rim
radius ``R``. A point is labeled pothole iff it lies inside the rim and the
bowl depth there exceeds the noise sigma, which reduces to a squared-distance
test against a per-pothole label radius.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import SyntheticSceneSpec
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import PlacementError
from pothole_seg.shared.types import FloatArray, SemanticClass

logger = get_logger(__name__)

# Sine components of the road height field
_ROUGHNESS_WAVES = 3
# Taylor terms of cos on [0, pi/2] and bisection steps for the label radius
_COS_TERMS = 12
_BISECTION_STEPS = 60


def bowl_profile(t: float) -> float:
    """Relative bowl depth ``(1 + cos(pi * t)) / 2`` at ``t = r / R`` in ``[0, 1]``.

    Evaluated as ``cos(pi * t / 2) ** 2`` from a fixed Taylor series, so the
    result uses only IEEE add, multiply and divide.
    """
    x = np.pi * t / 2.0
    term = total = 1.0
    for n in range(1, _COS_TERMS):
        term *= -x * x / ((2 * n - 1) * (2 * n))
        total += term
    return total * total


@dataclass(frozen=True)
class Pothole:
    center: tuple[float, float]
    radius: float
    depth: float

    def label_radius(self, noise_sigma: float) -> float:
        """Distance from the center within which the bowl is deeper than ``noise_sigma``.

        Found by bisection on the series profile; zero when the noise is at
        least as deep as the bowl.
        """
        if noise_sigma <= 0.0:
            return self.radius
        if noise_sigma >= self.depth:
            return 0.0
        lo, hi = 0.0, 1.0
        for _ in range(_BISECTION_STEPS):
            mid = (lo + hi) / 2.0
            if self.depth * bowl_profile(mid) > noise_sigma:
                lo = mid
            else:
                hi = mid
        return self.radius * lo

    def depression(self, xy: FloatArray) -> FloatArray:
        r = np.linalg.norm(xy - np.asarray(self.center), axis=1)
        inside = r < self.radius
        return np.where(inside, self.depth * (1.0 + np.cos(np.pi * r / self.radius)) / 2.0, 0.0)


class SceneGenerator:
    """Builds one labeled cloud per ``SyntheticSceneSpec``; pure in the spec."""

    def __init__(self, spec: SyntheticSceneSpec) -> None:
        self.spec = spec

    def place_potholes(self, rng: np.random.Generator) -> list[Pothole]:
        """Draw non-overlapping bowls fully inside the patch.

        Raises:
            PlacementError: If a bowl cannot be placed within the attempt budget
        """
        spec = self.spec
        placed: list[Pothole] = []
        for index in range(spec.pothole_count):
            for _ in range(spec.max_placement_attempts):
                radius = float(rng.uniform(*spec.radius_range))
                depth = float(rng.uniform(*spec.depth_range))
                center = rng.uniform(radius, spec.extent - radius, size=2)
                if all(
                    np.hypot(*(center - np.asarray(p.center))) >= radius + p.radius for p in placed
                ):
                    placed.append(Pothole((float(center[0]), float(center[1])), radius, depth))
                    break
            else:
                raise PlacementError(
                    f"Could not place pothole {index + 1} of {spec.pothole_count} without overlap "
                    f"after {spec.max_placement_attempts} attempts",
                    placed=len(placed),
                )
        return placed

    def road_surface(self, xy: FloatArray, rng: np.random.Generator) -> FloatArray:
        spec = self.spec
        if spec.roughness == 0.0:
            return np.zeros(xy.shape[0])
        freqs = rng.integers(1, 3, size=(_ROUGHNESS_WAVES, 2))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=_ROUGHNESS_WAVES)
        waves = np.sin(2.0 * np.pi * (xy @ freqs.T) / spec.extent + phases)
        return spec.roughness * waves.mean(axis=1)

    def generate(self) -> tuple[PointCloud, list[Pothole]]:
        spec = self.spec
        rng = np.random.default_rng(spec.seed)
        potholes = self.place_potholes(rng)
        n = spec.point_count
        xy = rng.uniform(0.0, spec.extent, size=(n, 2))
        z = self.road_surface(xy, rng)
        for pothole in potholes:
            z = z - pothole.depression(xy)
        if spec.noise_sigma > 0.0:
            z = z + rng.normal(0.0, spec.noise_sigma, size=n)

        labels = np.full(n, SemanticClass.ROAD.value, dtype=np.int64)
        for pothole in potholes:
            d2 = np.sum((xy - np.asarray(pothole.center)) ** 2, axis=1)
            labels[d2 < pothole.label_radius(spec.noise_sigma) ** 2] = SemanticClass.POTHOLE.value

        cloud = PointCloud(np.column_stack([xy, z]), labels=labels)
        fraction = cloud.pothole_fraction()
        if potholes and not 0.0 < fraction < 0.5:
            logger.warning(f"Scene seed {spec.seed}: pothole fraction {fraction:.3f} outside (0, 0.5)")
        logger.debug(f"Generated scene seed {spec.seed}: {n} points, {len(potholes)} potholes")
        return cloud, potholes


def generate_scene(spec: SyntheticSceneSpec) -> PointCloud:
    """Labeled cloud for ``spec``; the same spec always gives the same cloud."""
    cloud, _ = SceneGenerator(spec).generate()
    return cloud


def scene_specs(spec: SyntheticSceneSpec, count: int, offset: int = 0) -> Iterator[SyntheticSceneSpec]:
    """Specs of a dataset: cloud ``i`` uses seed ``spec.seed + offset + i``."""
    for i in range(count):
        yield spec.model_copy(update={"seed": spec.seed + offset + i})


def generate_dataset(spec: SyntheticSceneSpec, count: int, offset: int = 0) -> list[PointCloud]:
    return [generate_scene(s) for s in scene_specs(spec, count, offset)]
