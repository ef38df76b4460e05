"""Desk-scale learning runs on the synthetic road task (slow)."""

from pathlib import Path

import pytest

from pothole_seg.application.facades import SegmentationFacade
from pothole_seg.domain.services import run_summary
from pothole_seg.infrastructure.config import ConfigManager
from pothole_seg.shared.constants import BEST_CHECKPOINT, CHECKPOINT_DIR, LAST_CHECKPOINT

pytestmark = [pytest.mark.integration, pytest.mark.slow]

DESK_CONFIG = Path(__file__).parents[2] / "configs" / "desk.yaml"


def desk_facade(seed: int | None = None) -> SegmentationFacade:
    manager = ConfigManager.load(DESK_CONFIG)
    if seed is not None:
        manager.apply_overrides(seed=seed)
    return SegmentationFacade(manager.config)


class TestDeskScale:
    """Test the network learns the synthetic two-class task."""

    def test_segments_potholes(self, tmp_path):
        """Test 60 epochs reach mIoU >= 0.85 and OA >= 0.95 on held-out clouds."""
        facade = desk_facade()
        outcome = facade.train(tmp_path)
        assert len(outcome.records) == 60
        assert outcome.records[-1].mean_loss < 0.25 * outcome.records[0].mean_loss

        report = facade.evaluate(tmp_path / CHECKPOINT_DIR / LAST_CHECKPOINT, out_dir=tmp_path)
        assert report.miou >= 0.85, report.summary()
        assert report.oa >= 0.95, report.summary()
        assert (tmp_path / CHECKPOINT_DIR / BEST_CHECKPOINT).exists()


class TestAblationDirection:
    """Test the feature augmenter helps and steadies training."""

    def test_majority_of_seeds(self, tmp_path):
        """Test over three seeds most runs favour the augmenter on accuracy and variance."""
        wins = 0
        for seed in (0, 1, 2):
            outcome = desk_facade(seed).ablate(tmp_path / f"seed{seed}")
            with_fa = run_summary(outcome.with_fa.records)
            without = run_summary(outcome.without_fa.records)
            if (
                with_fa["final_train_oa"] >= without["final_train_oa"]
                and with_fa["train_oa_variance"] <= without["train_oa_variance"]
            ):
                wins += 1
        assert wins >= 2
