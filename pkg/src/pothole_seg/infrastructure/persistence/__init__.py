"""Checkpoint persistence."""

from pothole_seg.infrastructure.persistence.checkpoint_store import (
    Checkpoint,
    decode_checkpoint,
    encode_checkpoint,
    load_checkpoint,
    read_checkpoint,
    save_checkpoint,
)

__all__ = [
    "Checkpoint",
    "decode_checkpoint",
    "encode_checkpoint",
    "load_checkpoint",
    "read_checkpoint",
    "save_checkpoint",
]
