"""End-to-end runs of the command-line workflow on tiny test-mode networks."""

import copy
import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from pothole_seg.__main__ import main
from pothole_seg.domain.services import evaluate
from pothole_seg.infrastructure.config import ConfigManager
from pothole_seg.infrastructure.exports import read_training_log
from pothole_seg.infrastructure.logging import setup_logging
from pothole_seg.infrastructure.parser import read_cloud
from pothole_seg.infrastructure.persistence import load_checkpoint
from pothole_seg.infrastructure.synthetic import generate_dataset
from pothole_seg.shared.constants import (
    BEST_CHECKPOINT,
    CHECKPOINT_DIR,
    EVAL_RECORDS_NAME,
    LAST_CHECKPOINT,
    RESOLVED_CONFIG_NAME,
    RUN_LOG_NAME,
    TRAINING_LOG_NAME,
)

pytestmark = pytest.mark.integration

QUIET = ["--debug", "WARNING"]


def write_config(path: Path, data: dict) -> Path:
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def run(config: Path, out: Path, *command: str) -> int:
    try:
        return main([*QUIET, "--config", str(config), "--out", str(out), *command])
    finally:
        setup_logging(log_level="WARNING", console_output=True)


@pytest.fixture(scope="module")
def smoke_file(tmp_path_factory, smoke_config_data) -> Path:
    return write_config(tmp_path_factory.mktemp("config") / "smoke.yaml", smoke_config_data)


@pytest.fixture(scope="module")
def trained(tmp_path_factory, smoke_file) -> Path:
    out = tmp_path_factory.mktemp("trained")
    assert run(smoke_file, out, "train") == 0
    return out


class TestTrain:
    """Test the train command."""

    def test_outputs(self, trained):
        """Test the log, checkpoints and run files are written."""
        records, parameters = read_training_log(trained / TRAINING_LOG_NAME)
        assert [r.epoch for r in records] == [0, 1, 2]
        assert parameters is not None and parameters > 0
        checkpoints = {p.name for p in (trained / CHECKPOINT_DIR).iterdir()}
        assert {LAST_CHECKPOINT, BEST_CHECKPOINT, "epoch_002.pgck"} <= checkpoints
        assert not any(name.endswith(".tmp") for name in checkpoints)
        assert (trained / RESOLVED_CONFIG_NAME).exists()
        assert (trained / RUN_LOG_NAME).read_text().strip()

    def test_learning_rate_column(self, trained):
        """Test the logged learning rates follow the decay."""
        records, _ = read_training_log(trained / TRAINING_LOG_NAME)
        assert [r.lr for r in records] == pytest.approx([0.01, 0.0095, 0.009025])

    def test_byte_reproducible(self, trained, smoke_file, tmp_path):
        """Test a second run with the same seed writes identical files."""
        assert run(smoke_file, tmp_path, "train") == 0
        assert (tmp_path / TRAINING_LOG_NAME).read_bytes() == (trained / TRAINING_LOG_NAME).read_bytes()
        last = Path(CHECKPOINT_DIR) / LAST_CHECKPOINT
        assert (tmp_path / last).read_bytes() == (trained / last).read_bytes()

    def test_resume_matches_straight_run(self, trained, smoke_config_data, smoke_file, tmp_path):
        """Test two epochs plus a resumed third equal three straight epochs."""
        short = copy.deepcopy(smoke_config_data)
        short["train"]["epochs"] = 2
        assert run(write_config(tmp_path / "short.yaml", short), tmp_path / "run", "train") == 0
        assert run(smoke_file, tmp_path / "run", "train", "--resume") == 0
        assert (tmp_path / "run" / TRAINING_LOG_NAME).read_bytes() == (trained / TRAINING_LOG_NAME).read_bytes()
        last = Path(CHECKPOINT_DIR) / LAST_CHECKPOINT
        assert (tmp_path / "run" / last).read_bytes() == (trained / last).read_bytes()

    def test_resume_without_checkpoint(self, smoke_file, tmp_path):
        """Test --resume on an empty directory starts fresh."""
        assert run(smoke_file, tmp_path, "train", "--resume") == 0
        records, _ = read_training_log(tmp_path / TRAINING_LOG_NAME)
        assert len(records) == 3

    def test_no_feature_augmenter_is_smaller(self, trained, smoke_file, tmp_path):
        """Test the ablated network has fewer parameters."""
        assert run(smoke_file, tmp_path, "train", "--no-feature-augmenter") == 0
        _, without = read_training_log(tmp_path / TRAINING_LOG_NAME)
        _, with_fa = read_training_log(trained / TRAINING_LOG_NAME)
        assert without < with_fa

    def test_train_from_directories(self, smoke_config_data, smoke_file, tmp_path):
        """Test clouds written by gen can be trained on."""
        assert run(smoke_file, tmp_path / "train_data", "gen", "--count", "2") == 0
        assert run(smoke_file, tmp_path / "val_data", "gen", "--count", "1", "--format", "xyzl") == 0
        data = copy.deepcopy(smoke_config_data)
        data["train"]["epochs"] = 1
        data["dataset"] = {"train_dir": str(tmp_path / "train_data"), "val_dir": str(tmp_path / "val_data")}
        assert run(write_config(tmp_path / "dirs.yaml", data), tmp_path / "run", "train") == 0
        records, _ = read_training_log(tmp_path / "run" / TRAINING_LOG_NAME)
        assert len(records) == 1
        assert not np.isnan(records[0].val_miou)


class TestEvaluate:
    """Test the eval command."""

    def test_matches_library_evaluation(self, trained, smoke_file, tmp_path):
        """Test the CLI record equals evaluating the checkpoint directly."""
        checkpoint = trained / CHECKPOINT_DIR / LAST_CHECKPOINT
        assert run(smoke_file, tmp_path, "eval", str(checkpoint)) == 0
        record = json.loads((tmp_path / EVAL_RECORDS_NAME).read_text().splitlines()[-1])

        config = ConfigManager.load(smoke_file).config
        net, _ = load_checkpoint(checkpoint)
        val = generate_dataset(config.scene, config.dataset.val_count, offset=config.dataset.train_count)
        report = evaluate(net, val, seed=config.seed)
        assert record["miou"] == report.miou
        assert record["oa"] == report.oa
        assert record["confusion"] == report.confusion.tolist()
        assert record["clouds"] == 2

    def test_records_append(self, trained, smoke_file, tmp_path):
        """Test repeated evaluations append records."""
        checkpoint = trained / CHECKPOINT_DIR / BEST_CHECKPOINT
        run(smoke_file, tmp_path, "eval", str(checkpoint))
        run(smoke_file, tmp_path, "eval", str(checkpoint))
        assert len((tmp_path / EVAL_RECORDS_NAME).read_text().splitlines()) == 2


class TestSegment:
    """Test the segment command."""

    @pytest.mark.parametrize("fmt", ["ply", "xyzl"])
    def test_deterministic_output(self, trained, smoke_file, tmp_path, fmt):
        """Test two segmentations of one cloud are byte-identical and keep the format."""
        assert run(smoke_file, tmp_path / "data", "gen", "--count", "1", "--format", fmt) == 0
        cloud_in = tmp_path / "data" / f"cloud_0000.{fmt}"
        checkpoint = str(trained / CHECKPOINT_DIR / LAST_CHECKPOINT)
        for name in ("a", "b"):
            assert run(smoke_file, tmp_path, "segment", checkpoint, str(cloud_in), str(tmp_path / f"{name}.{fmt}")) == 0
        assert (tmp_path / f"a.{fmt}").read_bytes() == (tmp_path / f"b.{fmt}").read_bytes()
        segmented = read_cloud(tmp_path / f"a.{fmt}")
        assert segmented.num_points == read_cloud(cloud_in).num_points
        assert set(np.unique(segmented.labels)) <= {0, 1}

    def test_severity_report(self, trained, smoke_file, tmp_path):
        """Test --report writes the severity JSON with the inference time."""
        assert run(smoke_file, tmp_path / "data", "gen", "--count", "1") == 0
        checkpoint = str(trained / CHECKPOINT_DIR / LAST_CHECKPOINT)
        code = run(
            smoke_file, tmp_path, "segment", checkpoint,
            str(tmp_path / "data" / "cloud_0000.ply"), str(tmp_path / "out.ply"),
            "--report", str(tmp_path / "report.json"),
        )
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["inference_seconds"] >= 0.0
        assert {"plane", "footprint_area", "total_volume", "regions"} <= set(report)


class TestAblate:
    """Test the ablate command."""

    def test_paired_outputs(self, smoke_file, tmp_path, capsys):
        """Test both runs and the paired exports are written."""
        assert run(smoke_file, tmp_path, "ablate") == 0
        for variant in ("with_fa", "without_fa"):
            assert (tmp_path / variant / TRAINING_LOG_NAME).exists()
        lines = (tmp_path / "ablation.csv").read_text().splitlines()
        assert lines[1].startswith("epoch,fa_mean_loss")
        assert len(lines) == 5
        assert (tmp_path / "ablation.dat").exists()
        summary = json.loads((tmp_path / "ablation_summary.json").read_text())
        assert summary["with_fa"]["parameters"] > summary["without_fa"]["parameters"]
        assert json.loads(capsys.readouterr().out) == summary
