"""Segmentation metrics over labeled clouds."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import EvalReport
from pothole_seg.domain.modules import SegmentationNetwork
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import ClassCountMismatchError, CloudValidationError
from pothole_seg.shared.types import Mode

logger = get_logger(__name__)


def confusion_matrix(
    labels: npt.ArrayLike,
    predictions: npt.ArrayLike,
    num_classes: int,
) -> npt.NDArray[np.int64]:
    """Counts ``[C,C]``: rows are ground truth, columns predictions."""
    truth = np.asarray(labels, dtype=np.int64)
    predicted = np.asarray(predictions, dtype=np.int64)
    if truth.shape != predicted.shape:
        raise CloudValidationError(
            f"Label and prediction shapes differ: {truth.shape} vs {predicted.shape}"
        )
    for name, values in (("label", truth), ("prediction", predicted)):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise ClassCountMismatchError(
                f"{name} id outside [0, {num_classes})", num_classes=num_classes
            )
    flat = np.bincount(truth * num_classes + predicted, minlength=num_classes * num_classes)
    return flat.reshape(num_classes, num_classes).astype(np.int64)


class MetricsService:
    """Accumulates a confusion matrix over clouds."""

    def __init__(self, num_classes: int) -> None:
        self.num_classes = num_classes
        self.confusion = np.zeros((num_classes, num_classes), dtype=np.int64)

    def update(self, labels: npt.ArrayLike, predictions: npt.ArrayLike) -> None:
        self.confusion += confusion_matrix(labels, predictions, self.num_classes)

    def report(self) -> EvalReport:
        return EvalReport.from_confusion(self.confusion)


def evaluate(
    net: SegmentationNetwork,
    dataset: Sequence[PointCloud],
    seed: int = 0,
) -> EvalReport:
    """Confusion matrix and metrics of ``net`` in inference mode over ``dataset``.

    Cloud ``i`` is segmented with a generator seeded by ``(seed, i)``.

    Raises:
        CloudValidationError: If a cloud carries no labels
        ClassCountMismatchError: If a label does not fit the network's classes
    """
    logger.trace(f"Starting {__name__}...")
    num_classes = net.config.num_classes
    metrics = MetricsService(num_classes)
    for i, cloud in enumerate(dataset):
        if cloud.labels is None:
            raise CloudValidationError(f"Cloud {i} has no labels to evaluate against", cloud=i)
        result = net.forward(cloud, Mode.INFER, np.random.default_rng((seed, i)))
        metrics.update(cloud.labels, result.predictions())
    report = metrics.report()
    logger.debug(f"Evaluated {len(dataset)} clouds: {report.summary()}")
    return report
