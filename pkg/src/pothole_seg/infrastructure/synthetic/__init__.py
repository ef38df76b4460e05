"""Synthetic labeled road scenes."""

from pothole_seg.infrastructure.synthetic.scene_generator import (
    Pothole,
    SceneGenerator,
    generate_dataset,
    generate_scene,
    scene_specs,
)

__all__ = [
    "Pothole",
    "SceneGenerator",
    "generate_dataset",
    "generate_scene",
    "scene_specs",
]
