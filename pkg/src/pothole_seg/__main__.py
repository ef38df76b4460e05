"""Command-line entry point for pothole-seg."""

import argparse
import json
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from pothole_seg.application.facades import SegmentationFacade
from pothole_seg.infrastructure.config import ConfigManager
from pothole_seg.infrastructure.logging import add_run_log, remove_run_log, setup_logging
from pothole_seg.shared.constants import RUN_LOG_NAME
from pothole_seg.shared.exceptions import DataError, PotholeSegError
from pothole_seg.shared.types import CloudFormat


def setup_argument_parser() -> argparse.ArgumentParser:
    """Setup command line argument parser.

    Returns:
        Configured argument parser
    """
    parser = argparse.ArgumentParser(
        prog="pothole-seg",
        description="Point-cloud pothole segmentation: generate, train, evaluate, segment, ablate",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument("--version", action="version", version="%(prog)s dev")
    parser.add_argument(
        "--debug",
        type=str,
        choices=["TRACE", "DEBUG", "INFO", "WARNING", "ERROR"],
        default="INFO",
        help="Console log level (default: INFO)",
    )
    parser.add_argument("--config", type=Path, help="YAML run file")
    parser.add_argument("--seed", type=int, help="Seed applied to training, scenes and inference")
    parser.add_argument("--out", type=Path, dest="out_dir", help="Output directory")
    parser.add_argument(
        "--test-mode",
        action="store_true",
        help="Relax the strict 5-stage / 512x sampling ladder",
    )

    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Generate labeled synthetic road clouds")
    gen.add_argument("--count", type=int, default=None, help="Number of clouds (default: dataset.train_count)")
    gen.add_argument(
        "--format",
        type=CloudFormat,
        choices=list(CloudFormat),
        default=CloudFormat.PLY,
        dest="fmt",
        help="Cloud file format (default: ply)",
    )

    train = commands.add_parser("train", help="Train a segmentation network")
    train.add_argument(
        "--no-feature-augmenter",
        action="store_false",
        dest="feature_augmenter",
        default=None,
        help="Build the network without feature augmenter blocks",
    )
    train.add_argument("--resume", action="store_true", help="Continue from checkpoints/last.pgck")

    evaluate = commands.add_parser("eval", help="Evaluate a checkpoint")
    evaluate.add_argument("checkpoint", type=Path)
    evaluate.add_argument("--data", type=Path, help="Directory of labeled clouds (default: validation set)")

    segment = commands.add_parser("segment", help="Label every point of a cloud")
    segment.add_argument("checkpoint", type=Path)
    segment.add_argument("cloud_in", type=Path)
    segment.add_argument("cloud_out", type=Path)
    segment.add_argument("--report", type=Path, help="Write a pothole severity report (JSON)")

    commands.add_parser("ablate", help="Paired trainings with and without the feature augmenter")
    commands.add_parser("info", help="Print the parameter report of the configured network")

    return parser


def _resolve_config(args: argparse.Namespace) -> ConfigManager:
    manager = ConfigManager.load(args.config) if args.config else ConfigManager()
    manager.apply_overrides(
        seed=args.seed,
        output_dir=args.out_dir,
        test_mode=args.test_mode,
        use_feature_augmenter=getattr(args, "feature_augmenter", None),
    )
    return manager


def run_gen(args: argparse.Namespace, manager: ConfigManager) -> int:
    config = manager.config
    count = config.dataset.train_count if args.count is None else args.count
    if count < 0:
        raise DataError(f"--count must be non-negative, got {count}")
    manager.echo(config.output_dir)
    SegmentationFacade(config).generate(count, config.output_dir, args.fmt)
    return 0


def run_train(args: argparse.Namespace, manager: ConfigManager) -> int:
    config = manager.config
    manager.echo(config.output_dir)
    outcome = SegmentationFacade(config).train(config.output_dir, resume=args.resume)
    if outcome.records:
        last = outcome.records[-1]
        print(
            f"epochs={len(outcome.records)} parameters={outcome.parameter_count} "
            f"loss={last.mean_loss:.6f} train_oa={last.train_oa:.4f} val_miou={last.val_miou:.4f}"
        )
    return 0


def run_eval(args: argparse.Namespace, manager: ConfigManager) -> int:
    config = manager.config
    report = SegmentationFacade(config).evaluate(args.checkpoint, args.data, config.output_dir)
    print(report.summary())
    return 0


def run_segment(args: argparse.Namespace, manager: ConfigManager) -> int:
    outcome = SegmentationFacade(manager.config).segment(
        args.checkpoint, args.cloud_in, args.cloud_out, args.report
    )
    line = f"points={outcome.predictions.size} seconds={outcome.seconds:.3f}"
    if outcome.severity is not None:
        line += f" potholes={len(outcome.severity.regions)} volume={outcome.severity.total_volume:.6g}"
    print(line)
    return 0


def run_ablate(args: argparse.Namespace, manager: ConfigManager) -> int:
    config = manager.config
    manager.echo(config.output_dir)
    outcome = SegmentationFacade(config).ablate(config.output_dir)
    print(json.dumps(outcome.summaries, indent=2))
    return 0


def run_info(args: argparse.Namespace, manager: ConfigManager) -> int:
    print(json.dumps(SegmentationFacade(manager.config).info(), indent=2))
    return 0


COMMANDS: dict[str, Callable[[argparse.Namespace, ConfigManager], int]] = {
    "gen": run_gen,
    "train": run_train,
    "eval": run_eval,
    "segment": run_segment,
    "ablate": run_ablate,
    "info": run_info,
}


def _cause(error: BaseException) -> str:
    lines = str(error).strip().splitlines()
    return lines[0] if lines else type(error).__name__


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point.

    Returns:
        Exit code: 0 ok, 2 config error, 3 data error, 4 numeric failure, 1 otherwise
    """
    parser = setup_argument_parser()
    args = parser.parse_args(argv)
    logger = setup_logging(log_level=args.debug, console_output=True)

    sink_id: int | None = None
    try:
        manager = _resolve_config(args)
        if args.command != "info":
            sink_id = add_run_log(manager.config.output_dir / RUN_LOG_NAME)
        logger.info(f"Running {args.command}")
        return COMMANDS[args.command](args, manager)
    except PotholeSegError as e:
        logger.error(f"{type(e).__name__}: {_cause(e)}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{type(e).__name__}: {_cause(e)}")
        return DataError.exit_code
    except Exception as e:
        logger.opt(exception=e).error(f"Unexpected error: {_cause(e)}")
        return 1
    finally:
        if sink_id is not None:
            remove_run_log(sink_id)


if __name__ == "__main__":
    sys.exit(main())
