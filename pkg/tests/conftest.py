"""Shared fixtures."""

from pathlib import Path

import numpy as np
import pytest
import yaml

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import NetworkConfig, SyntheticSceneSpec, TrainConfig
from pothole_seg.infrastructure.logging import setup_logging
from pothole_seg.infrastructure.synthetic import generate_scene


@pytest.fixture(autouse=True, scope="session")
def quiet_logging():
    """Only warnings reach the console during tests."""
    setup_logging(log_level="WARNING", console_output=True)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_network_config() -> NetworkConfig:
    """Two-stage test-mode network small enough for gradient checks."""
    return NetworkConfig(
        k=8,
        encoder_widths=[8, 16],
        downsample_ratios=[4, 2],
        fa_depth_input=1,
        fa_depth_bottleneck=1,
        head_widths=[16, 8],
        strict=False,
    )


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    return TrainConfig(epochs=3, lr0=0.01, seed=7, checkpoint_every=2)


@pytest.fixture
def small_scene_spec() -> SyntheticSceneSpec:
    return SyntheticSceneSpec(num_points=128, seed=3)


@pytest.fixture
def small_cloud(small_scene_spec: SyntheticSceneSpec) -> PointCloud:
    return generate_scene(small_scene_spec)


@pytest.fixture
def random_cloud(rng: np.random.Generator) -> PointCloud:
    """Unstructured 64-point cloud with two classes."""
    positions = rng.uniform(-1.0, 1.0, size=(64, 3))
    labels = (positions[:, 0] > 0).astype(np.int64)
    return PointCloud(positions, labels=labels)


@pytest.fixture(scope="session")
def smoke_config_data() -> dict:
    """Run file contents for fast end-to-end runs (copy before changing)."""
    return {
        "seed": 11,
        "network": {
            "k": 8,
            "encoder_widths": [8, 16],
            "downsample_ratios": [4, 2],
            "fa_depth_input": 1,
            "fa_depth_bottleneck": 1,
            "head_widths": [16, 8],
            "strict": False,
        },
        "train": {"epochs": 3, "lr0": 0.01, "checkpoint_every": 2},
        "scene": {"num_points": 128},
        "dataset": {"train_count": 4, "val_count": 2},
    }


@pytest.fixture
def smoke_config_file(tmp_path: Path, smoke_config_data: dict) -> Path:
    path = tmp_path / "smoke.yaml"
    path.write_text(yaml.safe_dump(smoke_config_data), encoding="utf-8")
    return path
