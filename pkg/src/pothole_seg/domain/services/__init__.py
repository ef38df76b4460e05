"""Domain services: loss, optimizer, training, metrics and severity."""

from pothole_seg.domain.services.loss import cross_entropy, inverse_frequency_weights, log_softmax
from pothole_seg.domain.services.metrics_service import MetricsService, confusion_matrix, evaluate
from pothole_seg.domain.services.optimizer import Adam, AdamState, adam_step
from pothole_seg.domain.services.severity_service import (
    PotholeRegion,
    SeverityReport,
    assess_severity,
    connected_regions,
    fit_road_plane,
)
from pothole_seg.domain.services.training_service import (
    EpochRecord,
    TrainingProgress,
    TrainingResult,
    TrainingService,
    lr_at,
    run_summary,
    train,
)

__all__ = [
    "Adam",
    "AdamState",
    "EpochRecord",
    "MetricsService",
    "PotholeRegion",
    "SeverityReport",
    "TrainingProgress",
    "TrainingResult",
    "TrainingService",
    "adam_step",
    "assess_severity",
    "confusion_matrix",
    "connected_regions",
    "cross_entropy",
    "evaluate",
    "fit_road_plane",
    "inverse_frequency_weights",
    "log_softmax",
    "lr_at",
    "run_summary",
    "train",
]
