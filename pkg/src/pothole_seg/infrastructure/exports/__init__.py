"""File exporters."""

from pothole_seg.infrastructure.exports.cloud_writer import CloudWriter, atomic_write_text, write_cloud
from pothole_seg.infrastructure.exports.plot_exporter import AblationExporter
from pothole_seg.infrastructure.exports.training_log import (
    append_jsonl,
    format_training_log,
    read_training_log,
    write_training_log,
)

__all__ = [
    "AblationExporter",
    "CloudWriter",
    "append_jsonl",
    "atomic_write_text",
    "format_training_log",
    "read_training_log",
    "write_cloud",
    "write_training_log",
]
