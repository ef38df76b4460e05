"""Run configuration loading."""

from pothole_seg.infrastructure.config.config_manager import (
    ConfigManager,
    DatasetConfig,
    RunConfig,
)

__all__ = [
    "ConfigManager",
    "DatasetConfig",
    "RunConfig",
]
