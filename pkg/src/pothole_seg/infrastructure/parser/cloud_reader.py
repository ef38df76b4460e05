"""Readers for labeled point-cloud files (ascii PLY and xyzl)."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import ParseError
from pothole_seg.shared.types import CloudFormat

logger = get_logger(__name__)

_PLY_SCALARS = {"char", "uchar", "short", "ushort", "int", "uint", "float", "double",
                "int8", "uint8", "int16", "uint16", "int32", "uint32", "float32", "float64"}
_LABEL_NAMES = ("label", "scalar_label", "class")


class CloudReader:
    """Parses a cloud file into a ``PointCloud``.

    Every error names the file and, where it applies, the 1-based line.
    """

    def __init__(self, num_classes: int | None = None) -> None:
        self.num_classes = num_classes

    def read(self, path: Path, fmt: CloudFormat | None = None) -> PointCloud:
        logger.trace(f"Starting {__name__}...")
        if not path.exists():
            raise ParseError(f"Cloud file not found: {path}", file=str(path))
        fmt = fmt or CloudFormat.from_path(path)
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except (OSError, UnicodeDecodeError) as e:
            raise ParseError(f"Failed to read {path}: {e}", file=str(path)) from e

        if fmt is CloudFormat.PLY:
            cloud = self._parse_ply(lines, str(path))
        else:
            cloud = self._parse_xyzl(lines, str(path))
        logger.debug(f"Read {cloud.num_points} points ({cloud.feature_dim} features) from {path}")
        return cloud

    def _row(self, tokens: list[str], source: str, line_no: int) -> list[float]:
        try:
            values = [float(t) for t in tokens]
        except ValueError as e:
            raise ParseError(f"{source}:{line_no}: non-numeric value ({e})", file=source, line=line_no) from e
        return values

    def _label(self, value: float, source: str, line_no: int) -> int:
        if not math.isfinite(value) or value != int(value) or value < 0:
            raise ParseError(f"{source}:{line_no}: invalid label {value}", file=source, line=line_no)
        label = int(value)
        if self.num_classes is not None and label >= self.num_classes:
            raise ParseError(
                f"{source}:{line_no}: unknown label id {label} (expected < {self.num_classes})",
                file=source,
                line=line_no,
            )
        return label

    def _parse_xyzl(self, lines: list[str], source: str) -> PointCloud:
        rows: list[list[float]] = []
        labels: list[int] = []
        width: int | None = None
        for line_no, raw in enumerate(lines, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            tokens = text.split()
            if width is None:
                if len(tokens) < 4:
                    raise ParseError(
                        f"{source}:{line_no}: expected 'x y z [features...] label', got {len(tokens)} columns",
                        file=source,
                        line=line_no,
                    )
                width = len(tokens)
            elif len(tokens) != width:
                raise ParseError(
                    f"{source}:{line_no}: expected {width} columns, got {len(tokens)}",
                    file=source,
                    line=line_no,
                )
            values = self._row(tokens, source, line_no)
            if not all(math.isfinite(v) for v in values[:3]):
                raise ParseError(f"{source}:{line_no}: non-finite coordinate", file=source, line=line_no)
            labels.append(self._label(values[-1], source, line_no))
            rows.append(values[:-1])
        if not rows:
            raise ParseError(f"{source}: no points", file=source)
        data = np.asarray(rows, dtype=np.float64)
        return PointCloud(data[:, :3], data[:, 3:], np.asarray(labels, dtype=np.int64))

    def _parse_ply(self, lines: list[str], source: str) -> PointCloud:
        if not lines or lines[0].strip() != "ply":
            raise ParseError(f"{source}:1: missing 'ply' magic", file=source, line=1)

        vertex_count: int | None = None
        properties: list[str] = []
        fmt_seen = False
        body_start: int | None = None
        for line_no, raw in enumerate(lines[1:], start=2):
            tokens = raw.split()
            if not tokens or tokens[0] in ("comment", "obj_info"):
                continue
            keyword = tokens[0]
            if keyword == "format":
                if tokens[1:3] != ["ascii", "1.0"]:
                    raise ParseError(
                        f"{source}:{line_no}: only 'format ascii 1.0' is supported",
                        file=source,
                        line=line_no,
                    )
                fmt_seen = True
            elif keyword == "element":
                if len(tokens) != 3 or tokens[1] != "vertex":
                    raise ParseError(
                        f"{source}:{line_no}: unsupported element '{' '.join(tokens[1:])}'",
                        file=source,
                        line=line_no,
                    )
                try:
                    vertex_count = int(tokens[2])
                except ValueError as e:
                    raise ParseError(f"{source}:{line_no}: bad vertex count", file=source, line=line_no) from e
            elif keyword == "property":
                if vertex_count is None:
                    raise ParseError(
                        f"{source}:{line_no}: property before 'element vertex'", file=source, line=line_no
                    )
                if len(tokens) != 3 or tokens[1] not in _PLY_SCALARS:
                    raise ParseError(
                        f"{source}:{line_no}: unsupported property '{raw.strip()}'", file=source, line=line_no
                    )
                properties.append(tokens[2])
            elif keyword == "end_header":
                body_start = line_no
                break
            else:
                raise ParseError(f"{source}:{line_no}: unexpected header line '{raw.strip()}'",
                                 file=source, line=line_no)

        missing = [
            name
            for name, present in (
                ("format", fmt_seen),
                ("element vertex", vertex_count is not None),
                *((f"property {axis}", axis in properties) for axis in ("x", "y", "z")),
                ("end_header", body_start is not None),
            )
            if not present
        ]
        if missing:
            raise ParseError(f"{source}: truncated ply header, missing {', '.join(missing)}",
                             file=source, missing=missing)
        assert vertex_count is not None and body_start is not None

        label_column = next((properties.index(n) for n in _LABEL_NAMES if n in properties), None)
        xyz = [properties.index(axis) for axis in ("x", "y", "z")]
        feature_columns = [i for i in range(len(properties)) if i not in xyz and i != label_column]

        rows: list[list[float]] = []
        labels: list[int] = []
        for line_no, raw in enumerate(lines[body_start:], start=body_start + 1):
            tokens = raw.split()
            if not tokens:
                continue
            if len(rows) == vertex_count:
                raise ParseError(f"{source}:{line_no}: more than {vertex_count} vertices",
                                 file=source, line=line_no)
            if len(tokens) != len(properties):
                raise ParseError(
                    f"{source}:{line_no}: expected {len(properties)} values, got {len(tokens)}",
                    file=source,
                    line=line_no,
                )
            values = self._row(tokens, source, line_no)
            ordered = [values[i] for i in xyz]
            if not all(math.isfinite(v) for v in ordered):
                raise ParseError(f"{source}:{line_no}: non-finite coordinate", file=source, line=line_no)
            rows.append(ordered + [values[i] for i in feature_columns])
            if label_column is not None:
                labels.append(self._label(values[label_column], source, line_no))
        if len(rows) != vertex_count:
            raise ParseError(f"{source}: expected {vertex_count} vertices, found {len(rows)}", file=source)
        if not rows:
            raise ParseError(f"{source}: no points", file=source)

        data = np.asarray(rows, dtype=np.float64)
        return PointCloud(
            data[:, :3],
            data[:, 3:],
            np.asarray(labels, dtype=np.int64) if label_column is not None else None,
        )


def read_cloud(path: Path, fmt: CloudFormat | None = None, num_classes: int | None = None) -> PointCloud:
    """Read a labeled cloud; the format follows the suffix unless given."""
    return CloudReader(num_classes).read(Path(path), fmt)
