"""Encoder-decoder segmentation network.

Stem lift to ``stem_width`` channels, optional input feature augmenter, one
local-context encoder layer plus random subsampling per stage, optional
bottleneck feature augmenter, mirrored decoder with nearest-neighbour
upsampling and skip concatenation, and a three-layer classification head.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from pothole_seg.domain.autodiff import (
    LinearLayer,
    Mlp,
    ParameterRegistry,
    Tensor,
    concat,
    dropout,
    gather_rows,
    relu,
)
from pothole_seg.domain.geometry import (
    PointCloud,
    SamplingTrace,
    knn,
    nn_upsample,
    random_subsample,
    subsample_with_kept,
)
from pothole_seg.domain.interfaces import ExtractorFactory, LocalFeatureExtractor
from pothole_seg.domain.models import NetworkConfig
from pothole_seg.domain.modules.feature_augmenter import FeatureAugmenterBlock
from pothole_seg.domain.modules.local_context import EncoderLayer, build_encoder_layer
from pothole_seg.shared.exceptions import CloudTooSmallError, CloudValidationError
from pothole_seg.shared.types import FloatArray, IndexArray, Mode


@dataclass(frozen=True)
class StageRecord:
    """What one encoder stage saw and produced."""
    num_points: int
    k: int
    skip_width: int
    trace: SamplingTrace

    @property
    def kept(self) -> IndexArray:
        return self.trace.kept


@dataclass
class ForwardResult:
    """Logits ``[N,C]`` plus the per-stage record of the pass."""
    logits: Tensor
    stages: list[StageRecord] = field(default_factory=list)
    decoder_rows: list[int] = field(default_factory=list)

    @property
    def kept_sets(self) -> list[IndexArray]:
        return [stage.kept for stage in self.stages]

    @property
    def stage_points(self) -> list[int]:
        """Point counts down the ladder, including the bottleneck."""
        if not self.stages:
            return []
        return [s.num_points for s in self.stages] + [self.stages[-1].trace.coarse_count]

    def predictions(self) -> IndexArray:
        return np.argmax(self.logits.data, axis=1).astype(np.int64)


class SegmentationNetwork:
    """Per-point classifier over a single point cloud (batch size 1)."""

    def __init__(
        self,
        config: NetworkConfig,
        rng: np.random.Generator,
        extractor_factory: ExtractorFactory = build_encoder_layer,
    ) -> None:
        self.config = config
        self.registry = ParameterRegistry()
        reg = self.registry
        widths = config.encoder_widths

        self.stem = LinearLayer(config.in_channels, config.stem_width, reg, "stem", rng)
        self.input_fa: FeatureAugmenterBlock | None = None
        if config.use_feature_augmenter:
            self.input_fa = FeatureAugmenterBlock(
                config.stem_width, config.fa_depth_input, reg, "input_fa", rng
            )

        self.encoders: list[LocalFeatureExtractor] = []
        d_in = config.stem_width
        for i, width in enumerate(widths):
            self.encoders.append(
                extractor_factory(d_in, width, config.local_repetition, reg, f"encoder{i}", rng)
            )
            d_in = width

        self.bottleneck_fa: FeatureAugmenterBlock | None = None
        if config.use_feature_augmenter:
            self.bottleneck_fa = FeatureAugmenterBlock(
                widths[-1], config.fa_depth_bottleneck, reg, "bottleneck_fa", rng
            )

        self.decoders: list[Mlp] = []
        h = widths[-1]
        for s, out in enumerate(config.decoder_widths):
            skip = widths[config.num_stages - 1 - s]
            self.decoders.append(Mlp([h + skip, out, out], reg, f"decoder{s}", rng, final_activation=True))
            h = out

        hidden1, hidden2 = config.head_widths
        self.head = [
            LinearLayer(h, hidden1, reg, "head.fc0", rng),
            LinearLayer(hidden1, hidden2, reg, "head.fc1", rng),
            LinearLayer(hidden2, config.num_classes, reg, "head.fc2", rng),
        ]

    @property
    def parameter_count(self) -> int:
        return self.registry.count()

    def input_lift(self, cloud: PointCloud) -> Tensor:
        """Stem features ``[N,stem_width]`` from positions, features and zero padding."""
        channels = self.config.in_channels
        used = 3 + cloud.feature_dim
        if used > channels:
            raise CloudValidationError(
                f"Cloud carries {cloud.feature_dim} feature channels; the network accepts "
                f"at most {channels - 3}",
                feature_dim=cloud.feature_dim,
            )
        lifted = np.zeros((cloud.num_points, channels), dtype=np.float64)
        lifted[:, :3] = cloud.positions
        lifted[:, 3:used] = cloud.features
        return self.stem(Tensor(lifted))

    def _check_size(self, cloud: PointCloud) -> None:
        minimum = self.config.min_points
        if cloud.num_points < minimum:
            raise CloudTooSmallError(
                f"Cloud has {cloud.num_points} points; the strict sampling ladder needs at "
                f"least {minimum}. Use a test-mode config (--test-mode) for smaller clouds.",
                points=cloud.num_points,
                minimum=minimum,
            )

    def forward(
        self,
        cloud: PointCloud,
        mode: Mode,
        rng: np.random.Generator,
        kept_sets: Sequence[IndexArray] | None = None,
    ) -> ForwardResult:
        """Per-point logits at full resolution.

        Sampling and dropout generators are both drawn from ``rng``.
        ``kept_sets`` replays explicit per-stage kept indices instead of
        random sampling.
        """
        self._check_size(cloud)
        config = self.config
        if kept_sets is not None and len(kept_sets) != config.num_stages:
            raise CloudValidationError(
                f"Expected {config.num_stages} kept sets, got {len(kept_sets)}"
            )
        sampling_rng = np.random.default_rng(int(rng.integers(2**63)))
        dropout_rng = np.random.default_rng(int(rng.integers(2**63)))

        x = self.input_lift(cloud)
        if self.input_fa is not None:
            x = self.input_fa(x)

        positions: FloatArray = cloud.positions
        skips: list[Tensor] = []
        stages: list[StageRecord] = []
        for i, (extractor, ratio) in enumerate(zip(self.encoders, config.downsample_ratios, strict=True)):
            n = positions.shape[0]
            k = min(config.k, n)
            features = extractor(positions, x, knn(positions, k))
            skips.append(features)
            level = PointCloud(positions)
            if kept_sets is not None:
                coarse, trace = subsample_with_kept(level, kept_sets[i])
            else:
                coarse, trace = random_subsample(level, ratio, sampling_rng)
            stages.append(StageRecord(num_points=n, k=k, skip_width=features.shape[1], trace=trace))
            x = gather_rows(features, trace.kept)
            positions = coarse.positions

        if self.bottleneck_fa is not None:
            x = self.bottleneck_fa(x)

        decoder_rows: list[int] = []
        for s, decoder in enumerate(self.decoders):
            j = config.num_stages - 1 - s
            upsampled = nn_upsample(x, stages[j].trace, stages[j].num_points)
            x = decoder(concat([upsampled, skips[j]], axis=1))
            decoder_rows.append(x.shape[0])

        fc0, fc1, fc2 = self.head
        x = relu(fc0(x))
        x = dropout(x, config.dropout_rate, mode is Mode.TRAIN, dropout_rng)
        x = relu(fc1(x))
        logits = fc2(x)
        return ForwardResult(logits=logits, stages=stages, decoder_rows=decoder_rows)

    __call__ = forward


def build(
    config: NetworkConfig,
    rng: np.random.Generator,
    extractor_factory: ExtractorFactory = build_encoder_layer,
) -> SegmentationNetwork:
    """Construct and initialize a network from ``config``."""
    return SegmentationNetwork(config, rng, extractor_factory)


def expected_parameter_count(config: NetworkConfig) -> int:
    """Closed-form trainable scalar count of the default network for ``config``."""
    widths = config.encoder_widths
    total = LinearLayer.parameter_count(config.in_channels, config.stem_width)
    if config.use_feature_augmenter:
        total += FeatureAugmenterBlock.parameter_count(config.stem_width, config.fa_depth_input)
        total += FeatureAugmenterBlock.parameter_count(widths[-1], config.fa_depth_bottleneck)

    d_in = config.stem_width
    for width in widths:
        total += EncoderLayer.parameter_count(d_in, width, config.local_repetition)
        d_in = width

    h = widths[-1]
    for s, out in enumerate(config.decoder_widths):
        total += Mlp.parameter_count([h + widths[config.num_stages - 1 - s], out, out])
        h = out

    hidden1, hidden2 = config.head_widths
    total += LinearLayer.parameter_count(h, hidden1)
    total += LinearLayer.parameter_count(hidden1, hidden2)
    total += LinearLayer.parameter_count(hidden2, config.num_classes)
    return total
