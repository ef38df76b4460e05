"""Contract for per-stage local feature extractors."""

from typing import Protocol, runtime_checkable

import numpy as np

from pothole_seg.domain.autodiff import ParameterRegistry, Tensor
from pothole_seg.domain.geometry import NeighborIndex
from pothole_seg.shared.types import FloatArray


@runtime_checkable
class LocalFeatureExtractor(Protocol):
    """Maps per-point features to richer features using each point's neighbourhood.

    Implementations keep the number of points and change only the width.
    """

    in_dim: int
    out_dim: int

    def __call__(
        self,
        positions: FloatArray,
        features: Tensor,
        neighbors: NeighborIndex,
    ) -> Tensor:
        """Encode one resolution level.

        Args:
            positions: Point coordinates ``[N,3]``
            features: Input features ``[N,in_dim]``
            neighbors: k-nearest-neighbour index over ``positions``

        Returns:
            Output features ``[N,out_dim]``
        """
        ...


class ExtractorFactory(Protocol):
    """Builds the extractor of one encoder stage."""

    def __call__(
        self,
        in_dim: int,
        out_dim: int,
        repetition: int,
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
    ) -> LocalFeatureExtractor:
        ...
