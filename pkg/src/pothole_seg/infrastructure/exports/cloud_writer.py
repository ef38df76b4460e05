"""Writers for labeled point-cloud files."""

from __future__ import annotations

from pathlib import Path

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import CloudValidationError
from pothole_seg.shared.types import CloudFormat

logger = get_logger(__name__)


def _num(value: float) -> str:
    return format(float(value), ".17g")


def atomic_write_text(path: Path, text: str) -> None:
    """Write ``text`` to ``<path>.tmp`` and rename it onto ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    temp = path.with_suffix(path.suffix + ".tmp")
    try:
        temp.write_text(text, encoding="utf-8")
        temp.replace(path)
    except OSError:
        if temp.exists():
            temp.unlink()
        raise


class CloudWriter:
    """Serializes a labeled ``PointCloud`` as ascii PLY or xyzl."""

    def __init__(self, comment: str = "pothole-seg") -> None:
        self.comment = comment

    def _lines_xyzl(self, cloud: PointCloud) -> list[str]:
        assert cloud.labels is not None
        lines = [f"# {self.comment}: points={cloud.num_points} features={cloud.feature_dim}"]
        for pos, feats, label in zip(cloud.positions, cloud.features, cloud.labels, strict=True):
            values = [_num(v) for v in pos] + [_num(v) for v in feats] + [str(int(label))]
            lines.append(" ".join(values))
        return lines

    def _lines_ply(self, cloud: PointCloud) -> list[str]:
        assert cloud.labels is not None
        header = [
            "ply",
            "format ascii 1.0",
            f"comment {self.comment}",
            f"element vertex {cloud.num_points}",
            "property float x",
            "property float y",
            "property float z",
            *(f"property float f{i}" for i in range(cloud.feature_dim)),
            "property uchar label",
            "end_header",
        ]
        body = [
            " ".join([_num(v) for v in pos] + [_num(v) for v in feats] + [str(int(label))])
            for pos, feats, label in zip(cloud.positions, cloud.features, cloud.labels, strict=True)
        ]
        return header + body

    def write(self, cloud: PointCloud, path: Path, fmt: CloudFormat | None = None) -> Path:
        """Write ``cloud`` to ``path``.

        Raises:
            CloudValidationError: If the cloud has no labels, or a label does
                not fit the PLY ``uchar`` label property
        """
        logger.trace(f"Starting {__name__}...")
        if cloud.labels is None:
            raise CloudValidationError("Only labeled clouds can be written")
        fmt = fmt or CloudFormat.from_path(path)
        if fmt is CloudFormat.PLY and cloud.labels.size and cloud.labels.max() > 255:
            raise CloudValidationError("PLY label property is uchar; labels must be <= 255")
        lines = self._lines_ply(cloud) if fmt is CloudFormat.PLY else self._lines_xyzl(cloud)
        atomic_write_text(path, "\n".join(lines) + "\n")
        logger.debug(f"Wrote {cloud.num_points} points to {path} ({fmt.value})")
        return path


def write_cloud(cloud: PointCloud, path: Path, fmt: CloudFormat | None = None) -> Path:
    """Write a labeled cloud; the format follows the suffix unless given."""
    return CloudWriter().write(cloud, Path(path), fmt)
