"""Feature augmenter: global max-pool summary fused back into per-point features.

One cascade step maps ``x`` to ``x + residual_mlp(aggregate(x, g) - x)`` where
``g`` is the columnwise maximum of ``x`` and ``aggregate`` applies an MLP to
``[x_i, g]``. Steps run serially, each with its own parameters, and never
change the number of points or the feature width.
"""

from __future__ import annotations

import numpy as np

from pothole_seg.domain.autodiff import (
    Mlp,
    ParameterRegistry,
    Tensor,
    add,
    concat,
    max_pool_axis,
    repeat_rows,
    sub,
)
from pothole_seg.shared.exceptions import DimensionError


class FeatureAugmenterBlock:
    """Serially cascaded feature augmenter of width ``d``."""

    def __init__(
        self,
        d: int,
        depth: int,
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
    ) -> None:
        if depth < 1:
            raise DimensionError(f"Feature augmenter depth must be >= 1, got {depth}")
        self.d = d
        self.depth = depth
        self.aggregation_mlps = [
            Mlp([2 * d, d, d], registry, f"{name}.step{s}.aggregate", rng) for s in range(depth)
        ]
        self.residual_mlps = [
            Mlp([d, d, d], registry, f"{name}.step{s}.residual", rng) for s in range(depth)
        ]

    @staticmethod
    def parameter_count(d: int, depth: int) -> int:
        per_step = Mlp.parameter_count([2 * d, d, d]) + Mlp.parameter_count([d, d, d])
        return depth * per_step

    def _check_width(self, features: Tensor) -> None:
        if features.ndim != 2 or features.shape[1] != self.d:
            raise DimensionError(
                f"Feature augmenter expects [N,{self.d}] features, got {features.shape}",
                expected=self.d,
            )

    @staticmethod
    def global_summary(features: Tensor) -> Tensor:
        """Columnwise maximum over points, ``[N,d] -> [1,d]``."""
        pooled, _ = max_pool_axis(features, axis=0)
        return pooled

    def aggregate(self, features: Tensor, g: Tensor, step: int = 0) -> Tensor:
        """Local-global aggregation ``MLP([x_i, g])`` for cascade ``step``."""
        self._check_width(features)
        if g.shape != (1, self.d):
            raise DimensionError(f"Global feature must be [1,{self.d}], got {g.shape}")
        fused = concat([features, repeat_rows(g, features.shape[0])], axis=1)
        return self.aggregation_mlps[step](fused)

    def step(self, features: Tensor, step: int) -> Tensor:
        """One residual refinement step."""
        aggregated = self.aggregate(features, self.global_summary(features), step)
        return add(features, self.residual_mlps[step](sub(aggregated, features)))

    def augment(self, features: Tensor) -> Tensor:
        """Apply all ``depth`` cascade steps."""
        self._check_width(features)
        for s in range(self.depth):
            features = self.step(features, s)
        return features

    __call__ = augment
