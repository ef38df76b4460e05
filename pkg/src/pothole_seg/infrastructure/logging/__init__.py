"""Logging infrastructure."""

from pothole_seg.infrastructure.logging.setup import (
    add_run_log,
    get_logger,
    remove_run_log,
    setup_logging,
)

__all__ = [
    "add_run_log",
    "get_logger",
    "remove_run_log",
    "setup_logging",
]
