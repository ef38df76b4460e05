"""Validated configuration models.

All models reject unknown keys, so a typo in a run file fails loudly instead
of silently falling back to a default.
"""

from __future__ import annotations

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from pothole_seg.shared.constants import (
    STEM_WIDTH,
    STRICT_BOTTLENECK_WIDTH,
    STRICT_STAGES,
    STRICT_TOTAL_RATIO,
)
from pothole_seg.shared.types import ClassWeighting


class NetworkConfig(BaseModel):
    """Shape of the encoder-decoder network."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    k: int = Field(16, ge=1)
    encoder_widths: list[int] = Field(default_factory=lambda: [16, 64, 128, 256, 512])
    downsample_ratios: list[int] = Field(default_factory=lambda: [4, 4, 4, 4, 2])
    fa_depth_input: int = Field(2, ge=1)
    fa_depth_bottleneck: int = Field(2, ge=1)
    use_feature_augmenter: bool = True
    local_repetition: int = Field(1, ge=1)
    num_classes: int = Field(2, ge=2)
    dropout_rate: float = Field(0.5, ge=0.0, lt=1.0)
    head_widths: list[int] = Field(default_factory=lambda: [64, 32])
    in_channels: int = Field(6, ge=3)
    stem_width: int = Field(STEM_WIDTH, ge=1)
    strict: bool = True

    @model_validator(mode="after")
    def _check_ladder(self) -> NetworkConfig:
        if not self.encoder_widths:
            raise ValueError("encoder_widths must not be empty")
        if len(self.encoder_widths) != len(self.downsample_ratios):
            raise ValueError(
                f"encoder_widths ({len(self.encoder_widths)}) and downsample_ratios "
                f"({len(self.downsample_ratios)}) must have the same length"
            )
        if any(w < 1 for w in self.encoder_widths):
            raise ValueError("encoder widths must be positive")
        if any(r < 1 for r in self.downsample_ratios):
            raise ValueError("downsample ratios must be >= 1")
        if len(self.head_widths) != 2 or any(w < 1 for w in self.head_widths):
            raise ValueError("head_widths must hold two positive widths")
        if self.strict:
            if len(self.encoder_widths) != STRICT_STAGES:
                raise ValueError(f"strict ladder needs {STRICT_STAGES} stages")
            if math.prod(self.downsample_ratios) != STRICT_TOTAL_RATIO:
                raise ValueError(
                    f"downsample ratios must multiply to {STRICT_TOTAL_RATIO}, "
                    f"got {math.prod(self.downsample_ratios)}"
                )
            if self.encoder_widths[-1] != STRICT_BOTTLENECK_WIDTH:
                raise ValueError(f"last encoder width must be {STRICT_BOTTLENECK_WIDTH}")
            if self.stem_width != STEM_WIDTH:
                raise ValueError(f"stem width must be {STEM_WIDTH}")
        return self

    @property
    def num_stages(self) -> int:
        return len(self.encoder_widths)

    @property
    def total_ratio(self) -> int:
        return math.prod(self.downsample_ratios)

    @property
    def decoder_widths(self) -> list[int]:
        """Decoder output widths, deepest stage first (mirror of the encoder)."""
        widths = self.encoder_widths
        return [widths[j - 1] if j >= 1 else widths[0] for j in reversed(range(len(widths)))]

    @property
    def min_points(self) -> int:
        """Smallest cloud the forward pass accepts."""
        return self.total_ratio if self.strict else 1


class TrainConfig(BaseModel):
    """Optimizer, schedule and loop settings."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epochs: int = Field(100, ge=1)
    lr0: float = Field(0.02, gt=0.0)
    decay: float = Field(0.95, gt=0.0, le=1.0)
    adam_beta1: float = Field(0.9, ge=0.0, lt=1.0)
    adam_beta2: float = Field(0.999, ge=0.0, lt=1.0)
    adam_eps: float = Field(1e-8, gt=0.0)
    seed: int = Field(0, ge=0)
    class_weighting: ClassWeighting = ClassWeighting.NONE
    checkpoint_every: int = Field(10, ge=1)
    validate_every: int = Field(1, ge=1)


class SyntheticSceneSpec(BaseModel):
    """Procedural road patch with cosine-bowl potholes."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    extent: float = Field(4.0, gt=0.0)               # square patch side (m)
    point_density: float = Field(128.0, gt=0.0)      # points per m^2
    num_points: int | None = Field(None, ge=1)       # overrides density when set
    pothole_count: int = Field(1, ge=0)
    radius_range: tuple[float, float] = (0.35, 0.6)  # rim radius (m)
    depth_range: tuple[float, float] = (0.05, 0.12)  # bowl depth (m)
    roughness: float = Field(0.01, ge=0.0)           # height-field amplitude (m)
    noise_sigma: float = Field(0.003, ge=0.0)        # sensor noise (m)
    seed: int = Field(0, ge=0)
    max_placement_attempts: int = Field(1000, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> SyntheticSceneSpec:
        r_lo, r_hi = self.radius_range
        d_lo, d_hi = self.depth_range
        if not 0.0 < r_lo <= r_hi:
            raise ValueError(f"radius_range must satisfy 0 < min <= max, got {self.radius_range}")
        if not 0.0 < d_lo <= d_hi:
            raise ValueError(f"depth_range must satisfy 0 < min <= max, got {self.depth_range}")
        if 2.0 * r_hi >= self.extent:
            raise ValueError("pothole diameter must be smaller than the patch extent")
        if d_lo <= self.noise_sigma:
            raise ValueError("minimum pothole depth must exceed the noise sigma")
        return self

    @property
    def point_count(self) -> int:
        if self.num_points is not None:
            return self.num_points
        return max(1, round(self.point_density * self.extent * self.extent))
