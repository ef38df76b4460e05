"""Binary checkpoint container.

Layout (little-endian)::

    b"PGCK" | u32 version | u32 n + n bytes JSON network config
    u32 parameter count, then per parameter:
        u16 n + n bytes name | u8 ndim | ndim x u32 extent | float64 values
    u8 has_optimizer [u64 step | per parameter: float64 m | float64 v]
    u32 next epoch | f64 best metric
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from pothole_seg.domain.models import NetworkConfig
from pothole_seg.domain.modules import SegmentationNetwork, build
from pothole_seg.domain.services import AdamState
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.constants import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from pothole_seg.shared.exceptions import CheckpointError, CheckpointVersionError, DimensionError
from pothole_seg.shared.types import FloatArray

logger = get_logger(__name__)


@dataclass
class Checkpoint:
    """Decoded checkpoint contents."""
    config: NetworkConfig
    parameters: dict[str, FloatArray]
    optimizer: AdamState | None = None
    next_epoch: int = 0
    best_metric: float = -math.inf


class _Cursor:
    """Bounds-checked reader over checkpoint bytes."""

    def __init__(self, data: bytes, source: str) -> None:
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        if self.offset + size > len(self.data):
            raise CheckpointError(f"Truncated checkpoint {self.source} at byte {self.offset}", file=self.source)
        values = struct.unpack_from(fmt, self.data, self.offset)
        self.offset += size
        return values

    def raw(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointError(f"Truncated checkpoint {self.source} at byte {self.offset}", file=self.source)
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def floats(self, count: int) -> FloatArray:
        return np.frombuffer(self.raw(8 * count), dtype="<f8").astype(np.float64)


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    parts = [CHECKPOINT_MAGIC, struct.pack("<I", CHECKPOINT_VERSION)]
    config_json = checkpoint.config.model_dump_json().encode("utf-8")
    parts.append(struct.pack("<I", len(config_json)) + config_json)

    parts.append(struct.pack("<I", len(checkpoint.parameters)))
    for name, value in checkpoint.parameters.items():
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)) + encoded)
        parts.append(struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape))
        parts.append(np.ascontiguousarray(value, dtype="<f8").tobytes())

    state = checkpoint.optimizer
    parts.append(struct.pack("<B", state is not None))
    if state is not None:
        parts.append(struct.pack("<Q", state.step))
        for name in checkpoint.parameters:
            parts.append(np.ascontiguousarray(state.m[name], dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(state.v[name], dtype="<f8").tobytes())

    parts.append(struct.pack("<Id", checkpoint.next_epoch, checkpoint.best_metric))
    return b"".join(parts)


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        CheckpointVersionError: On a wrong magic or an unsupported version
        CheckpointError: On truncation or a malformed record
    """
    cursor = _Cursor(data, source)
    if cursor.raw(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise CheckpointVersionError(f"{source} is not a pothole-seg checkpoint (bad magic)", file=source)
    (version,) = cursor.take("<I")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"{source} has checkpoint format version {version}, expected {CHECKPOINT_VERSION}",
            file=source,
            version=version,
        )
    (config_len,) = cursor.take("<I")
    try:
        config = NetworkConfig.model_validate(json.loads(cursor.raw(config_len).decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, ValidationError) as e:
        raise CheckpointError(f"{source}: invalid embedded config: {e}", file=source) from e

    (count,) = cursor.take("<I")
    parameters: dict[str, FloatArray] = {}
    for _ in range(count):
        (name_len,) = cursor.take("<H")
        name = cursor.raw(name_len).decode("utf-8", errors="replace")
        (ndim,) = cursor.take("<B")
        shape = cursor.take(f"<{ndim}I")
        parameters[name] = cursor.floats(math.prod(shape)).reshape(shape)

    (has_optimizer,) = cursor.take("<B")
    optimizer: AdamState | None = None
    if has_optimizer:
        (step,) = cursor.take("<Q")
        optimizer = AdamState(step=step)
        for name, value in parameters.items():
            optimizer.m[name] = cursor.floats(value.size).reshape(value.shape)
            optimizer.v[name] = cursor.floats(value.size).reshape(value.shape)

    next_epoch, best_metric = cursor.take("<Id")
    if cursor.offset != len(data):
        raise CheckpointError(f"{source}: {len(data) - cursor.offset} trailing bytes", file=source)
    return Checkpoint(config, parameters, optimizer, next_epoch, best_metric)


def save_checkpoint(
    net: SegmentationNetwork,
    path: Path,
    optimizer_state: AdamState | None = None,
    next_epoch: int = 0,
    best_metric: float = -math.inf,
) -> Path:
    """Write ``net`` (and optionally the optimizer) atomically to ``path``."""
    logger.trace(f"Starting {__name__}...")
    checkpoint = Checkpoint(net.config, net.registry.state(), optimizer_state, next_epoch, best_metric)
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = path.with_suffix(path.suffix + ".tmp")
    temp.write_bytes(encode_checkpoint(checkpoint))
    temp.replace(path)
    logger.debug(f"Saved checkpoint {path} (epoch cursor {next_epoch})")
    return path


def read_checkpoint(path: Path) -> Checkpoint:
    if not path.exists():
        raise CheckpointError(f"Checkpoint not found: {path}", file=str(path))
    return decode_checkpoint(path.read_bytes(), source=str(path))


def load_checkpoint(
    path: Path,
    config: NetworkConfig | None = None,
) -> tuple[SegmentationNetwork, Checkpoint]:
    """Rebuild the network stored in ``path``.

    ``config`` overrides the embedded network config; its parameter shapes
    must then match the stored ones.

    Raises:
        CheckpointError: If the stored parameters do not fit the network
    """
    logger.trace(f"Starting {__name__}...")
    checkpoint = read_checkpoint(path)
    net = build(config or checkpoint.config, np.random.default_rng(0))
    try:
        net.registry.load_state(checkpoint.parameters)
    except DimensionError as e:
        raise CheckpointError(f"{path} does not match the network: {e}", file=str(path)) from e
    logger.info(f"Loaded checkpoint {path} ({net.parameter_count} parameters)")
    return net, checkpoint
