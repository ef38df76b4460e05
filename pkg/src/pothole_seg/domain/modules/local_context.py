"""Local-context block and the encoder layer built on it.

Per point, the eight-channel relative encoding of every neighbour is joined
with the neighbour's features, mapped by a shared pointwise MLP and
max-pooled over the neighbour axis. The pooled feature is refined by ``R``
independently parameterized blocks and projected to the output width.
"""

from __future__ import annotations

import numpy as np

from pothole_seg.domain.autodiff import (
    LinearLayer,
    Mlp,
    ParameterRegistry,
    Tensor,
    add,
    concat,
    gather_rows,
    max_pool_axis,
    relu,
    reshape,
)
from pothole_seg.domain.geometry import NeighborIndex, knn, relative_neighbor_encoding
from pothole_seg.shared.constants import CENTROID_CHANNELS, ENCODING_CHANNELS
from pothole_seg.shared.exceptions import DimensionError
from pothole_seg.shared.types import FloatArray


def neighbor_features(
    r: FloatArray,
    features: Tensor | None,
    nbrs: NeighborIndex,
) -> Tensor:
    """Join the relative encoding ``r [N,k,8]`` with gathered neighbour features.

    ``features=None`` stands for a zero-width feature set and returns ``r``
    as a constant tensor.
    """
    encoding = Tensor(r)
    if r.shape[:2] != nbrs.indices.shape:
        raise DimensionError(
            f"Encoding {r.shape} does not match neighbour index {nbrs.indices.shape}"
        )
    if features is None:
        return encoding
    if features.shape[0] != nbrs.num_points:
        raise DimensionError(
            f"Features have {features.shape[0]} rows, neighbour index {nbrs.num_points}"
        )
    return concat([encoding, gather_rows(features, nbrs.indices)], axis=2)


class LocalContextBlock:
    """Shared neighbour mapping, neighbour max-pool and ``R`` refine blocks."""

    def __init__(
        self,
        d_in: int,
        d_out: int,
        repetition: int,
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
    ) -> None:
        if repetition < 1:
            raise DimensionError(f"Local repetition must be >= 1, got {repetition}")
        self.d_in = d_in
        self.d_out = d_out
        self.repetition = repetition
        self.mapping_mlp = Mlp(
            [ENCODING_CHANNELS + d_in, d_out, d_out],
            registry,
            f"{name}.mapping",
            rng,
            final_activation=True,
        )
        self.refine_mlps = [
            LinearLayer(d_out, d_out, registry, f"{name}.refine{i}", rng) for i in range(repetition)
        ]
        self.out_mlp = LinearLayer(d_out, d_out, registry, f"{name}.out", rng)

    @staticmethod
    def parameter_count(d_in: int, d_out: int, repetition: int) -> int:
        return (
            Mlp.parameter_count([ENCODING_CHANNELS + d_in, d_out, d_out])
            + repetition * LinearLayer.parameter_count(d_out, d_out)
            + LinearLayer.parameter_count(d_out, d_out)
        )

    def pooled(self, p_hat: Tensor) -> Tensor:
        """Map every neighbour and max-pool over the neighbour axis: ``[N,d_out]``."""
        expected = ENCODING_CHANNELS + self.d_in
        if p_hat.ndim != 3 or p_hat.shape[2] != expected:
            raise DimensionError(
                f"Local context expects [N,k,{expected}] input, got {p_hat.shape}",
                expected=expected,
            )
        mapped = self.mapping_mlp(p_hat)
        pooled, _ = max_pool_axis(mapped, axis=1)
        return reshape(pooled, (p_hat.shape[0], self.d_out))

    def refine(self, g: Tensor) -> Tensor:
        for layer in self.refine_mlps:
            g = relu(layer(g))
        return self.out_mlp(g)

    def __call__(self, p_hat: Tensor) -> tuple[Tensor, Tensor]:
        """Return ``(g_hat, g)``: the refined context and the pooled feature."""
        g = self.pooled(p_hat)
        return self.refine(g), g


def local_context_forward(p_hat: Tensor, block: LocalContextBlock) -> Tensor:
    """Refined local context ``[N,d_out]`` of the joined neighbour tensor."""
    g_hat, _ = block(p_hat)
    return g_hat


class EncoderLayer:
    """Local-context encoder of one resolution level.

    Fusion: ``[g_hat, relu(proj(x))]`` is concatenated with the pooled
    neighbourhood feature, projected to ``d_out`` and summed with a linear
    shortcut of the input features.

    ``centroid_channels=False`` zeroes the absolute centroid coordinates in the
    relative encoding, which makes the layer translation invariant.
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        repetition: int,
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
        centroid_channels: bool = True,
    ) -> None:
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.centroid_channels = centroid_channels
        self.block = LocalContextBlock(in_dim, out_dim, repetition, registry, f"{name}.context", rng)
        self.projection = LinearLayer(in_dim, out_dim, registry, f"{name}.projection", rng)
        self.fuse = LinearLayer(3 * out_dim, out_dim, registry, f"{name}.fuse", rng)
        self.shortcut = LinearLayer(in_dim, out_dim, registry, f"{name}.shortcut", rng)

    @staticmethod
    def parameter_count(in_dim: int, out_dim: int, repetition: int) -> int:
        return (
            LocalContextBlock.parameter_count(in_dim, out_dim, repetition)
            + LinearLayer.parameter_count(in_dim, out_dim)
            + LinearLayer.parameter_count(3 * out_dim, out_dim)
            + LinearLayer.parameter_count(in_dim, out_dim)
        )

    def encode(self, positions: FloatArray, neighbors: NeighborIndex) -> FloatArray:
        r = relative_neighbor_encoding(positions, neighbors)
        if not self.centroid_channels:
            r[:, :, CENTROID_CHANNELS] = 0.0
        return r

    def __call__(
        self,
        positions: FloatArray,
        features: Tensor,
        neighbors: NeighborIndex,
    ) -> Tensor:
        if features.ndim != 2 or features.shape[1] != self.in_dim:
            raise DimensionError(
                f"Encoder layer expects [N,{self.in_dim}] features, got {features.shape}",
                expected=self.in_dim,
            )
        p_hat = neighbor_features(self.encode(positions, neighbors), features, neighbors)
        g_hat, g = self.block(p_hat)
        first = concat([g_hat, relu(self.projection(features))], axis=1)
        second = concat([first, g], axis=1)
        return add(self.fuse(second), self.shortcut(features))


def encoder_layer(
    positions: FloatArray,
    features: Tensor,
    layer: EncoderLayer,
    neighbors: NeighborIndex | None = None,
    k: int = 16,
) -> Tensor:
    """Run ``layer`` on one cloud, computing the neighbour index when absent."""
    if neighbors is None:
        neighbors = knn(positions, min(k, positions.shape[0]))
    return layer(positions, features, neighbors)


def build_encoder_layer(
    in_dim: int,
    out_dim: int,
    repetition: int,
    registry: ParameterRegistry,
    name: str,
    rng: np.random.Generator,
) -> EncoderLayer:
    """Default extractor factory used by the network."""
    return EncoderLayer(in_dim, out_dim, repetition, registry, name, rng)
