"""Training-log CSV and JSON-lines records."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from pothole_seg.domain.services import EpochRecord
from pothole_seg.infrastructure.exports.cloud_writer import atomic_write_text
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import ParseError

logger = get_logger(__name__)

_PARAMS_PREFIX = "# parameters="


def _cell(value: float | int) -> str:
    if isinstance(value, int):
        return str(value)
    return "nan" if math.isnan(value) else format(value, ".10g")


def format_training_log(records: Sequence[EpochRecord], parameter_count: int) -> str:
    buffer = io.StringIO()
    buffer.write(f"{_PARAMS_PREFIX}{parameter_count}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(EpochRecord.FIELDS)
    for record in records:
        writer.writerow([_cell(record.as_row()[name]) for name in EpochRecord.FIELDS])
    return buffer.getvalue()


def write_training_log(path: Path, records: Sequence[EpochRecord], parameter_count: int) -> Path:
    """Rewrite the whole log (atomic), so a resumed run keeps one continuous file."""
    atomic_write_text(path, format_training_log(records, parameter_count))
    logger.debug(f"Wrote {len(records)} epochs to {path}")
    return path


def read_training_log(path: Path) -> tuple[list[EpochRecord], int | None]:
    """Parse a log written by ``write_training_log``.

    Returns:
        Tuple of (records, parameter count or None when the comment is absent)
    """
    if not path.exists():
        raise ParseError(f"Training log not found: {path}", file=str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    parameters: int | None = None
    if lines and lines[0].startswith(_PARAMS_PREFIX):
        parameters = int(lines[0][len(_PARAMS_PREFIX):])
        lines = lines[1:]
    reader = csv.DictReader(lines)
    if tuple(reader.fieldnames or ()) != EpochRecord.FIELDS:
        raise ParseError(f"{path}: unexpected training log columns {reader.fieldnames}", file=str(path))
    records = []
    for line_no, row in enumerate(reader, start=2 + (parameters is not None)):
        try:
            records.append(
                EpochRecord(
                    epoch=int(row["epoch"]),
                    lr=float(row["lr"]),
                    mean_loss=float(row["mean_loss"]),
                    train_oa=float(row["train_oa"]),
                    val_oa=float(row["val_oa"]),
                    val_miou=float(row["val_miou"]),
                )
            )
        except (TypeError, ValueError) as e:
            raise ParseError(f"{path}:{line_no}: {e}", file=str(path), line=line_no) from e
    return records, parameters


def append_jsonl(path: Path, record: Mapping[str, Any]) -> Path:
    """Append one JSON object per line."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as f:
        f.write(json.dumps(record, sort_keys=True) + "\n")
    return path
