"""Training loop with per-epoch learning-rate decay."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any, ClassVar

import numpy as np

from pothole_seg.domain.autodiff import Tape
from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import TrainConfig
from pothole_seg.domain.modules import SegmentationNetwork
from pothole_seg.domain.services.loss import cross_entropy, inverse_frequency_weights
from pothole_seg.domain.services.metrics_service import evaluate
from pothole_seg.domain.services.optimizer import Adam
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.shared.exceptions import CloudValidationError, ConfigError, DataError, NonFiniteLossError
from pothole_seg.shared.types import ClassWeighting, FloatArray, Mode

logger = get_logger(__name__)


def lr_at(epoch: int, cfg: TrainConfig) -> float:
    """Learning rate of ``epoch``: ``lr0 * decay**epoch``."""
    if not 0 <= epoch < cfg.epochs:
        raise ConfigError(f"Epoch {epoch} outside [0, {cfg.epochs})", epoch=epoch)
    return cfg.lr0 * cfg.decay**epoch


@dataclass(frozen=True)
class EpochRecord:
    """One row of the training log. Validation columns are NaN when skipped."""
    epoch: int
    lr: float
    mean_loss: float
    train_oa: float
    val_oa: float = math.nan
    val_miou: float = math.nan

    FIELDS: ClassVar[tuple[str, ...]] = ("epoch", "lr", "mean_loss", "train_oa", "val_oa", "val_miou")

    def as_row(self) -> dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingProgress:
    """Resumable loop position."""
    next_epoch: int = 0
    best_metric: float = -math.inf
    records: list[EpochRecord] = field(default_factory=list)


# (record, service, improved) after every epoch
EpochCallback = Callable[[EpochRecord, "TrainingService", bool], None]


@dataclass
class TrainingResult:
    net: SegmentationNetwork
    records: list[EpochRecord]
    optimizer: Adam


class TrainingService:
    """Batch-size-one Adam training of a segmentation network."""

    def __init__(
        self,
        net: SegmentationNetwork,
        config: TrainConfig,
        optimizer: Adam | None = None,
        progress: TrainingProgress | None = None,
    ) -> None:
        self.net = net
        self.config = config
        self.optimizer = optimizer or Adam(net.registry, config)
        self.progress = progress or TrainingProgress()
        self.class_weights: FloatArray | None = None

    def _check_dataset(self, dataset: Sequence[PointCloud]) -> None:
        if not dataset:
            raise DataError("Training dataset is empty")
        for i, cloud in enumerate(dataset):
            if cloud.labels is None:
                raise CloudValidationError(f"Training cloud {i} has no labels", cloud=i)
            cloud.validate_labels(self.net.config.num_classes)

    def step(self, cloud: PointCloud, epoch: int, index: int, lr: float) -> tuple[float, int]:
        """One optimizer step on one cloud.

        Returns:
            Tuple of (loss, correctly classified points)
        """
        assert cloud.labels is not None
        self.net.registry.zero_grad()
        rng = np.random.default_rng((self.config.seed, epoch, index))
        with Tape() as tape:
            result = self.net.forward(cloud, Mode.TRAIN, rng)
            loss = cross_entropy(result.logits, cloud.labels, self.class_weights)
        value = loss.item()
        if not math.isfinite(value):
            raise NonFiniteLossError(
                f"Non-finite loss {value} at epoch {epoch}, cloud {index}",
                epoch=epoch,
                cloud=index,
            )
        tape.backward(loss, self.net.registry)
        self.optimizer.step(lr)
        corrupted = self.net.registry.non_finite()
        if corrupted:
            raise NonFiniteLossError(
                f"Non-finite parameters {corrupted[:3]} after the step at epoch {epoch}, cloud {index}",
                epoch=epoch,
                cloud=index,
            )
        correct = int(np.sum(result.predictions() == cloud.labels))
        return value, correct

    def run_epoch(self, dataset: Sequence[PointCloud], epoch: int) -> tuple[float, float]:
        """Seeded shuffle, then one step per cloud.

        Returns:
            Tuple of (mean loss, training overall accuracy)
        """
        lr = lr_at(epoch, self.config)
        order = np.random.default_rng((self.config.seed, epoch)).permutation(len(dataset))
        losses: list[float] = []
        correct = total = 0
        for position, index in enumerate(order):
            cloud = dataset[int(index)]
            loss, hits = self.step(cloud, epoch, int(index), lr)
            losses.append(loss)
            correct += hits
            total += cloud.num_points
            logger.trace(f"epoch {epoch} cloud {index} ({position + 1}/{len(order)}): loss={loss:.6f}")
        return float(np.mean(losses)), correct / total

    def train(
        self,
        dataset: Sequence[PointCloud],
        val_dataset: Sequence[PointCloud] | None = None,
        on_epoch_end: EpochCallback | None = None,
    ) -> list[EpochRecord]:
        """Train from ``progress.next_epoch`` to ``config.epochs``."""
        logger.trace(f"Starting {__name__}...")
        self._check_dataset(dataset)
        if self.config.class_weighting is ClassWeighting.INVERSE_FREQUENCY:
            self.class_weights = inverse_frequency_weights(
                (c.labels for c in dataset if c.labels is not None), self.net.config.num_classes
            )
            logger.info(f"Class weights: {np.round(self.class_weights, 4).tolist()}")

        cfg = self.config
        start = self.progress.next_epoch
        if start > 0:
            logger.info(f"Resuming at epoch {start} of {cfg.epochs}")
        for epoch in range(start, cfg.epochs):
            mean_loss, train_oa = self.run_epoch(dataset, epoch)
            val_oa = val_miou = math.nan
            validate = (epoch + 1) % cfg.validate_every == 0 or epoch == cfg.epochs - 1
            if val_dataset and validate:
                report = evaluate(self.net, val_dataset, seed=cfg.seed)
                val_oa, val_miou = report.oa, report.miou

            record = EpochRecord(epoch, lr_at(epoch, cfg), mean_loss, train_oa, val_oa, val_miou)
            self.progress.records.append(record)
            self.progress.next_epoch = epoch + 1

            # With a validation set only validated epochs compete for best.
            metric = val_miou if val_dataset else train_oa
            improved = not math.isnan(metric) and metric > self.progress.best_metric
            if improved:
                self.progress.best_metric = metric

            logger.info(
                f"epoch {epoch + 1}/{cfg.epochs} lr={record.lr:.6g} loss={mean_loss:.5f} "
                f"train_oa={train_oa:.4f} val_oa={val_oa:.4f} val_miou={val_miou:.4f}"
            )
            if on_epoch_end is not None:
                on_epoch_end(record, self, improved)
        return self.progress.records


def train(
    net: SegmentationNetwork,
    dataset: Sequence[PointCloud],
    cfg: TrainConfig,
    val_dataset: Sequence[PointCloud] | None = None,
    on_epoch_end: EpochCallback | None = None,
) -> TrainingResult:
    """Train ``net`` on ``dataset`` with a fresh optimizer."""
    service = TrainingService(net, cfg)
    records = service.train(dataset, val_dataset, on_epoch_end)
    return TrainingResult(net=net, records=records, optimizer=service.optimizer)


def run_summary(records: Sequence[EpochRecord], tail: int = 10, window: int = 30) -> dict[str, float]:
    """Final-``tail`` mean training accuracy and accuracy variance over the last ``window`` epochs."""
    accuracies = np.array([r.train_oa for r in records], dtype=np.float64)
    if accuracies.size == 0:
        return {"final_train_oa": math.nan, "train_oa_variance": math.nan, "final_loss": math.nan}
    return {
        "final_train_oa": float(accuracies[-tail:].mean()),
        "train_oa_variance": float(np.var(accuracies[-window:])),
        "final_loss": float(records[-1].mean_loss),
    }
