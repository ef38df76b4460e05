"""Segmentation facade - the application-layer surface the CLI drives."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import EvalReport
from pothole_seg.domain.modules import SegmentationNetwork, build, expected_parameter_count
from pothole_seg.domain.services import (
    Adam,
    EpochRecord,
    SeverityReport,
    TrainingProgress,
    TrainingService,
    assess_severity,
    evaluate,
    run_summary,
)
from pothole_seg.infrastructure.config import RunConfig
from pothole_seg.infrastructure.exports import (
    AblationExporter,
    append_jsonl,
    atomic_write_text,
    read_training_log,
    write_cloud,
    write_training_log,
)
from pothole_seg.infrastructure.logging import get_logger
from pothole_seg.infrastructure.parser import read_cloud
from pothole_seg.infrastructure.persistence import load_checkpoint, save_checkpoint
from pothole_seg.infrastructure.synthetic import generate_dataset, generate_scene, scene_specs
from pothole_seg.shared.constants import (
    BEST_CHECKPOINT,
    CHECKPOINT_DIR,
    EVAL_RECORDS_NAME,
    LAST_CHECKPOINT,
    MANIFEST_NAME,
    TRAINING_LOG_NAME,
)
from pothole_seg.shared.exceptions import DataError
from pothole_seg.shared.types import CloudFormat, IndexArray, Mode

logger = get_logger(__name__)

_CLOUD_SUFFIXES = {".ply", ".xyzl"}


@dataclass
class TrainingOutcome:
    records: list[EpochRecord]
    parameter_count: int
    log_path: Path
    checkpoint_dir: Path


@dataclass
class SegmentOutcome:
    predictions: IndexArray
    output_path: Path
    seconds: float
    severity: SeverityReport | None = None


@dataclass
class AblationOutcome:
    with_fa: TrainingOutcome
    without_fa: TrainingOutcome
    paths: list[Path] = field(default_factory=list)
    summaries: dict[str, dict[str, float]] = field(default_factory=dict)


class SegmentationFacade:
    """Generation, training, evaluation, inference and ablation for one run config."""

    def __init__(self, config: RunConfig | None = None) -> None:
        self.config = config or RunConfig()

    # Data

    def generate(self, count: int, out_dir: Path, fmt: CloudFormat = CloudFormat.PLY) -> list[Path]:
        """Write ``count`` synthetic clouds plus a manifest."""
        logger.trace(f"Starting {__name__}...")
        out_dir.mkdir(parents=True, exist_ok=True)
        paths: list[Path] = []
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["file", "seed", "points", "pothole_fraction"])
        for i, spec in enumerate(scene_specs(self.config.scene, count)):
            cloud = generate_scene(spec)
            path = write_cloud(cloud, out_dir / f"cloud_{i:04d}.{fmt.value}", fmt)
            writer.writerow([path.name, spec.seed, cloud.num_points, format(cloud.pothole_fraction(), ".10g")])
            paths.append(path)
        atomic_write_text(out_dir / MANIFEST_NAME, buffer.getvalue())
        logger.info(f"Generated {count} clouds in {out_dir}")
        return paths

    def read_directory(self, directory: Path) -> list[PointCloud]:
        if not directory.is_dir():
            raise DataError(f"Dataset directory not found: {directory}", path=str(directory))
        files = sorted(p for p in directory.iterdir() if p.suffix.lower() in _CLOUD_SUFFIXES)
        num_classes = self.config.network.num_classes
        return [read_cloud(p, num_classes=num_classes) for p in files]

    def load_dataset(self) -> tuple[list[PointCloud], list[PointCloud]]:
        """Training and validation clouds from directories or the scene spec."""
        ds, scene = self.config.dataset, self.config.scene
        train = self.read_directory(ds.train_dir) if ds.train_dir else generate_dataset(scene, ds.train_count)
        if ds.val_dir:
            val = self.read_directory(ds.val_dir)
        else:
            val = generate_dataset(scene, ds.val_count, offset=ds.train_count)
        logger.info(f"Dataset: {len(train)} training clouds, {len(val)} validation clouds")
        return train, val

    # Network

    def build_network(self) -> SegmentationNetwork:
        net = build(self.config.network, np.random.default_rng(self.config.train.seed))
        logger.info(f"Built network with {net.parameter_count} parameters")
        return net

    def info(self) -> dict[str, Any]:
        """Parameter report of the configured network."""
        net = self.build_network()
        cfg = self.config.network
        return {
            "parameters": net.parameter_count,
            "expected_parameters": expected_parameter_count(cfg),
            "breakdown": net.registry.breakdown(),
            "stages": cfg.num_stages,
            "encoder_widths": cfg.encoder_widths,
            "decoder_widths": cfg.decoder_widths,
            "min_points": cfg.min_points,
            "feature_augmenter": cfg.use_feature_augmenter,
        }

    # Training

    def train(self, out_dir: Path | None = None, resume: bool = False) -> TrainingOutcome:
        """Train with per-epoch log rewrite, last/periodic/best checkpoints."""
        logger.trace(f"Starting {__name__}...")
        config = self.config
        out_dir = out_dir or config.output_dir
        checkpoint_dir = out_dir / CHECKPOINT_DIR
        last_path = checkpoint_dir / LAST_CHECKPOINT
        log_path = out_dir / TRAINING_LOG_NAME
        train_set, val_set = self.load_dataset()

        optimizer: Adam | None = None
        progress: TrainingProgress | None = None
        if resume and last_path.exists():
            net, checkpoint = load_checkpoint(last_path, config.network)
            optimizer = Adam(net.registry, config.train)
            if checkpoint.optimizer is not None:
                optimizer.load_state(checkpoint.optimizer)
            records = read_training_log(log_path)[0] if log_path.exists() else []
            progress = TrainingProgress(
                next_epoch=checkpoint.next_epoch,
                best_metric=checkpoint.best_metric,
                records=records[: checkpoint.next_epoch],
            )
        else:
            if resume:
                logger.warning(f"No checkpoint at {last_path}; starting a fresh run")
            net = self.build_network()

        parameter_count = net.parameter_count
        every = config.train.checkpoint_every

        def on_epoch_end(record: EpochRecord, service: TrainingService, improved: bool) -> None:
            state = service.optimizer.state
            cursor, best = service.progress.next_epoch, service.progress.best_metric
            write_training_log(log_path, service.progress.records, parameter_count)
            save_checkpoint(net, last_path, state, cursor, best)
            if (record.epoch + 1) % every == 0:
                save_checkpoint(net, checkpoint_dir / f"epoch_{record.epoch + 1:03d}.pgck", state, cursor, best)
            if improved:
                save_checkpoint(net, checkpoint_dir / BEST_CHECKPOINT, state, cursor, best)

        service = TrainingService(net, config.train, optimizer, progress)
        records = service.train(train_set, val_set, on_epoch_end)
        write_training_log(log_path, records, parameter_count)
        return TrainingOutcome(records, parameter_count, log_path, checkpoint_dir)

    # Evaluation and inference

    def evaluate(
        self,
        checkpoint: Path,
        data_dir: Path | None = None,
        out_dir: Path | None = None,
    ) -> EvalReport:
        """Evaluate a checkpoint and append a JSON-lines record."""
        logger.trace(f"Starting {__name__}...")
        net, _ = load_checkpoint(checkpoint)
        dataset = self.read_directory(data_dir) if data_dir else self.load_dataset()[1]
        if not dataset:
            raise DataError("Evaluation dataset is empty")
        report = evaluate(net, dataset, seed=self.config.seed)
        out_dir = out_dir or self.config.output_dir
        record = {"checkpoint": str(checkpoint), "clouds": len(dataset), **report.to_dict()}
        append_jsonl(out_dir / EVAL_RECORDS_NAME, record)
        logger.info(report.summary())
        return report

    def segment(
        self,
        checkpoint: Path,
        cloud_in: Path,
        cloud_out: Path,
        report_path: Path | None = None,
    ) -> SegmentOutcome:
        """Label every point of ``cloud_in`` and write it in the input's format."""
        logger.trace(f"Starting {__name__}...")
        net, _ = load_checkpoint(checkpoint)
        cloud = read_cloud(cloud_in)
        start = time.perf_counter()
        result = net.forward(cloud, Mode.INFER, np.random.default_rng(self.config.seed))
        seconds = time.perf_counter() - start
        predictions = result.predictions()
        logger.info(f"Segmented {cloud.num_points} points in {seconds:.3f}s")

        labeled = cloud.with_labels(predictions)
        write_cloud(labeled, cloud_out, CloudFormat.from_path(cloud_in))
        severity = None
        if report_path is not None:
            severity = assess_severity(labeled, predictions)
            payload = {"cloud": str(cloud_in), "inference_seconds": seconds, **severity.to_dict()}
            atomic_write_text(report_path, json.dumps(payload, indent=2) + "\n")
        return SegmentOutcome(predictions, cloud_out, seconds, severity)

    # Ablation

    def _variant(self, use_feature_augmenter: bool) -> SegmentationFacade:
        network = self.config.network.model_copy(update={"use_feature_augmenter": use_feature_augmenter})
        return SegmentationFacade(self.config.model_copy(update={"network": network}))

    def ablate(self, out_dir: Path | None = None) -> AblationOutcome:
        """Seed-matched trainings with and without the feature augmenter."""
        logger.trace(f"Starting {__name__}...")
        out_dir = out_dir or self.config.output_dir
        with_fa = self._variant(True).train(out_dir / "with_fa")
        without_fa = self._variant(False).train(out_dir / "without_fa")

        exporter = AblationExporter(with_fa.records, without_fa.records)
        paths = [
            exporter.write_csv(out_dir / "ablation.csv", (with_fa.parameter_count, without_fa.parameter_count)),
            exporter.write_dat(out_dir / "ablation.dat"),
        ]
        svg = exporter.write_svg(out_dir / "ablation.svg")
        if svg is not None:
            paths.append(svg)

        summaries = {
            "with_fa": {"parameters": float(with_fa.parameter_count), **run_summary(with_fa.records)},
            "without_fa": {"parameters": float(without_fa.parameter_count), **run_summary(without_fa.records)},
        }
        atomic_write_text(out_dir / "ablation_summary.json", json.dumps(summaries, indent=2) + "\n")
        paths.append(out_dir / "ablation_summary.json")
        logger.info(f"Ablation summary: {summaries}")
        return AblationOutcome(with_fa, without_fa, paths, summaries)
