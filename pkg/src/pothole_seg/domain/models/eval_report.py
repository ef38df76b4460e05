"""Segmentation quality report."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt

from pothole_seg.shared.types import FloatArray


@dataclass(frozen=True)
class EvalReport:
    """Confusion matrix (rows = truth, cols = prediction) and derived metrics.

    Per-class entries that are undefined are NaN: IoU for classes absent from
    both truth and prediction, accuracy for classes with no truth points.
    Means skip NaN entries.
    """
    confusion: npt.NDArray[np.int64]
    oa: float
    macc: float
    miou: float
    per_class_iou: FloatArray
    per_class_acc: FloatArray

    @classmethod
    def from_confusion(cls, confusion: npt.ArrayLike) -> EvalReport:
        matrix = np.asarray(confusion, dtype=np.int64)
        total = int(matrix.sum())
        tp = np.diag(matrix).astype(np.float64)
        truth = matrix.sum(axis=1).astype(np.float64)
        predicted = matrix.sum(axis=0).astype(np.float64)
        union = truth + predicted - tp

        with np.errstate(divide="ignore", invalid="ignore"):
            iou = np.where(union > 0, tp / union, np.nan)
            acc = np.where(truth > 0, tp / truth, np.nan)

        return cls(
            confusion=matrix,
            oa=float(tp.sum() / total) if total else 0.0,
            macc=_nanmean(acc),
            miou=_nanmean(iou),
            per_class_iou=iou,
            per_class_acc=acc,
        )

    @property
    def num_classes(self) -> int:
        return int(self.confusion.shape[0])

    @property
    def num_points(self) -> int:
        return int(self.confusion.sum())

    def to_dict(self) -> dict[str, Any]:
        """JSON-friendly representation (NaN becomes ``None``)."""
        return {
            "oa": self.oa,
            "macc": self.macc,
            "miou": self.miou,
            "per_class_iou": [None if np.isnan(v) else float(v) for v in self.per_class_iou],
            "per_class_acc": [None if np.isnan(v) else float(v) for v in self.per_class_acc],
            "confusion": self.confusion.tolist(),
            "points": self.num_points,
        }

    def summary(self) -> str:
        ious = ", ".join(
            "n/a" if np.isnan(v) else f"{v:.4f}" for v in self.per_class_iou
        )
        return (
            f"OA={self.oa:.4f} mAcc={self.macc:.4f} mIoU={self.miou:.4f} "
            f"IoU per class=[{ious}]"
        )


def _nanmean(values: FloatArray) -> float:
    valid = values[~np.isnan(values)]
    return float(valid.mean()) if valid.size else 0.0
