"""Tests for the training loop."""

import math

import numpy as np
import pytest

from pothole_seg.domain.geometry import PointCloud
from pothole_seg.domain.models import TrainConfig
from pothole_seg.domain.modules import build
from pothole_seg.domain.services import (
    EpochRecord,
    TrainingService,
    cross_entropy,
    lr_at,
    run_summary,
    train,
)
from pothole_seg.shared.exceptions import (
    CloudValidationError,
    ConfigError,
    DataError,
    NonFiniteLossError,
)
from pothole_seg.shared.types import ClassWeighting, Mode


class TestLearningRate:
    """Test lr_at."""

    @pytest.mark.parametrize(("epoch", "expected"), [(0, 0.02), (1, 0.019), (99, 0.02 * 0.95**99)])
    def test_schedule(self, epoch, expected):
        """Test lr0 * decay**epoch with the default settings."""
        assert lr_at(epoch, TrainConfig()) == pytest.approx(expected)

    def test_last_epoch_value(self):
        """Test the final default epoch is roughly 1.25e-4."""
        assert lr_at(99, TrainConfig()) == pytest.approx(1.25e-4, rel=0.01)

    @pytest.mark.parametrize("epoch", [-1, 100])
    def test_out_of_range(self, epoch):
        """Test epochs outside the run are rejected."""
        with pytest.raises(ConfigError):
            lr_at(epoch, TrainConfig())


class TestTrainingService:
    """Test TrainingService."""

    def test_one_step_per_cloud(self, tiny_network_config, tiny_train_config, random_cloud):
        """Test one epoch over one cloud performs exactly one optimizer step."""
        net = build(tiny_network_config, np.random.default_rng(0))
        service = TrainingService(net, tiny_train_config.model_copy(update={"epochs": 1}))
        records = service.train([random_cloud])
        assert service.optimizer.steps == 1
        assert len(records) == 1
        assert records[0].lr == pytest.approx(0.01)

    def test_steps_per_epoch(self, tiny_network_config, tiny_train_config, random_cloud, small_cloud):
        """Test steps equal clouds times epochs."""
        net = build(tiny_network_config, np.random.default_rng(0))
        service = TrainingService(net, tiny_train_config)
        service.train([random_cloud, small_cloud])
        assert service.optimizer.steps == 6
        assert service.progress.next_epoch == 3

    def test_parameters_change(self, tiny_network_config, tiny_train_config, random_cloud):
        """Test training moves the weights."""
        net = build(tiny_network_config, np.random.default_rng(0))
        before = net.registry.state()
        train(net, [random_cloud], tiny_train_config)
        after = net.registry.state()
        assert any(not np.array_equal(before[name], after[name]) for name in before)

    def test_deterministic(self, tiny_network_config, tiny_train_config, random_cloud, small_cloud):
        """Test identical seeds give identical logs and weights."""
        runs = []
        for _ in range(2):
            net = build(tiny_network_config, np.random.default_rng(0))
            result = train(net, [random_cloud, small_cloud], tiny_train_config)
            runs.append((result.records, net.registry.state()))
        (records_a, state_a), (records_b, state_b) = runs
        assert records_a == records_b
        assert all(np.array_equal(state_a[name], state_b[name]) for name in state_a)

    def test_resume_matches_uninterrupted(self, tiny_network_config, tiny_train_config, random_cloud, small_cloud):
        """Test stopping after two epochs and resuming reproduces a straight run."""
        dataset = [random_cloud, small_cloud]
        straight_net = build(tiny_network_config, np.random.default_rng(0))
        straight = TrainingService(straight_net, tiny_train_config)
        straight.train(dataset)

        net = build(tiny_network_config, np.random.default_rng(0))
        first = TrainingService(net, tiny_train_config.model_copy(update={"epochs": 2}))
        first.train(dataset)
        second = TrainingService(net, tiny_train_config, optimizer=first.optimizer, progress=first.progress)
        records = second.train(dataset)

        assert records == straight.progress.records
        expected = straight_net.registry.state()
        actual = net.registry.state()
        assert all(np.array_equal(expected[name], actual[name]) for name in expected)

    def test_overfits_single_cloud(self, tiny_network_config, random_cloud):
        """Test repeated steps on one separable cloud drive the loss down."""
        config = tiny_network_config.model_copy(update={"dropout_rate": 0.0})
        net = build(config, np.random.default_rng(0))
        records = train(net, [random_cloud], TrainConfig(epochs=30, lr0=0.01, decay=1.0, seed=2)).records
        assert records[-1].mean_loss < 0.5 * records[0].mean_loss
        assert records[-1].train_oa >= records[0].train_oa

    def test_validation_columns(self, tiny_network_config, random_cloud, small_cloud):
        """Test skipped validations are NaN and the final epoch always validates."""
        net = build(tiny_network_config, np.random.default_rng(0))
        cfg = TrainConfig(epochs=3, lr0=0.01, validate_every=2)
        records = TrainingService(net, cfg).train([random_cloud], val_dataset=[small_cloud])
        assert math.isnan(records[0].val_miou)
        assert not math.isnan(records[1].val_miou)
        assert not math.isnan(records[2].val_oa)

    def test_epoch_callback(self, tiny_network_config, tiny_train_config, random_cloud):
        """Test the callback sees every epoch and the first one improves."""
        seen = []
        net = build(tiny_network_config, np.random.default_rng(0))
        TrainingService(net, tiny_train_config).train(
            [random_cloud], on_epoch_end=lambda record, service, improved: seen.append((record.epoch, improved))
        )
        assert [epoch for epoch, _ in seen] == [0, 1, 2]
        assert seen[0][1] is True

    def test_class_weighting(self, tiny_network_config, random_cloud):
        """Test inverse-frequency weights are computed from the training labels."""
        net = build(tiny_network_config, np.random.default_rng(0))
        cfg = TrainConfig(epochs=1, class_weighting=ClassWeighting.INVERSE_FREQUENCY)
        service = TrainingService(net, cfg)
        service.train([random_cloud])
        counts = np.bincount(random_cloud.labels, minlength=2)
        assert np.allclose(service.class_weights, 64 / (2 * counts))

    def test_empty_dataset(self, tiny_network_config, tiny_train_config):
        """Test an empty dataset is a data error."""
        net = build(tiny_network_config, np.random.default_rng(0))
        with pytest.raises(DataError):
            TrainingService(net, tiny_train_config).train([])

    def test_unlabeled_cloud(self, tiny_network_config, tiny_train_config, rng):
        """Test training clouds need labels."""
        net = build(tiny_network_config, np.random.default_rng(0))
        with pytest.raises(CloudValidationError):
            TrainingService(net, tiny_train_config).train([PointCloud(rng.normal(size=(16, 3)))])

    def test_non_finite_loss(self, tiny_network_config, tiny_train_config, random_cloud):
        """Test a NaN weight aborts with the epoch and cloud."""
        net = build(tiny_network_config, np.random.default_rng(0))
        net.stem.weight.data[0, 0] = np.nan
        with pytest.raises(NonFiniteLossError, match="epoch 0, cloud 0"):
            TrainingService(net, tiny_train_config).train([random_cloud])

    def test_non_finite_parameters_after_step(self, tiny_network_config, tiny_train_config, random_cloud):
        """Test a step that leaves a NaN parameter aborts training."""
        net = build(tiny_network_config, np.random.default_rng(0))
        service = TrainingService(net, tiny_train_config)
        update = service.optimizer.step

        def corrupting_step(lr):
            update(lr)
            net.stem.bias.data[0] = np.nan

        service.optimizer.step = corrupting_step
        with pytest.raises(NonFiniteLossError, match=r"stem\.bias.*epoch 0, cloud 0"):
            service.train([random_cloud])

    def test_nan_weight_reaches_loss(self, tiny_network_config, random_cloud):
        """Test a NaN stem weight makes the forward loss NaN."""
        net = build(tiny_network_config, np.random.default_rng(0))
        net.stem.weight.data[0, 0] = np.nan
        result = net.forward(random_cloud, Mode.TRAIN, np.random.default_rng(0))
        assert np.isnan(cross_entropy(result.logits, random_cloud.labels).item())


class TestRunSummary:
    """Test run_summary."""

    def test_tail_and_variance(self):
        """Test the tail mean and window variance of training accuracy."""
        records = [EpochRecord(i, 0.01, 1.0 / (i + 1), oa) for i, oa in enumerate([0.5, 0.7, 0.9, 0.9])]
        summary = run_summary(records, tail=2, window=3)
        assert summary["final_train_oa"] == pytest.approx(0.9)
        assert summary["train_oa_variance"] == pytest.approx(np.var([0.7, 0.9, 0.9]))
        assert summary["final_loss"] == pytest.approx(0.25)

    def test_empty(self):
        """Test an empty log yields NaN."""
        assert all(math.isnan(v) for v in run_summary([]).values())
