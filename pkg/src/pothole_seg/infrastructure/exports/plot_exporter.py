"""Side-by-side ablation outputs: CSV, gnuplot data file and an optional SVG chart."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from pathlib import Path

from pothole_seg.domain.services import EpochRecord
from pothole_seg.infrastructure.exports.cloud_writer import atomic_write_text
from pothole_seg.infrastructure.logging import get_logger

logger = get_logger(__name__)

_SERIES = ("mean_loss", "train_oa", "val_miou")


def _fmt(value: float) -> str:
    return "nan" if math.isnan(value) else format(value, ".10g")


class AblationExporter:
    """Writes paired training curves of a with/without feature augmenter run."""

    def __init__(self, with_fa: Sequence[EpochRecord], without_fa: Sequence[EpochRecord]) -> None:
        if len(with_fa) != len(without_fa):
            logger.warning(
                f"Ablation runs differ in length ({len(with_fa)} vs {len(without_fa)}); "
                "rows are paired up to the shorter run"
            )
        self.with_fa = list(with_fa)
        self.without_fa = list(without_fa)

    @property
    def columns(self) -> list[str]:
        return ["epoch"] + [f"fa_{s}" for s in _SERIES] + [f"nofa_{s}" for s in _SERIES]

    def rows(self) -> list[list[str]]:
        rows = []
        for on, off in zip(self.with_fa, self.without_fa, strict=False):
            rows.append(
                [str(on.epoch)]
                + [_fmt(getattr(on, s)) for s in _SERIES]
                + [_fmt(getattr(off, s)) for s in _SERIES]
            )
        return rows

    def write_csv(self, path: Path, parameters: tuple[int, int]) -> Path:
        buffer = io.StringIO()
        buffer.write(f"# parameters_fa={parameters[0]} parameters_nofa={parameters[1]}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows(self.rows())
        atomic_write_text(path, buffer.getvalue())
        return path

    def write_dat(self, path: Path) -> Path:
        """Whitespace-separated columns with a ``#`` header, plottable by gnuplot."""
        lines = ["# " + " ".join(self.columns)]
        lines.extend(" ".join(row) for row in self.rows())
        atomic_write_text(path, "\n".join(lines) + "\n")
        return path

    def write_svg(self, path: Path) -> Path | None:
        """Line chart of training accuracy and loss; skipped without matplotlib."""
        try:
            import matplotlib

            matplotlib.use("Agg")
            import matplotlib.pyplot as plt
        except ImportError:
            logger.warning("matplotlib is not installed (pip install 'pothole-seg[plot]'); skipping SVG")
            return None

        fig, axes = plt.subplots(1, 2, figsize=(11.0, 4.2))
        for records, label in ((self.with_fa, "with feature augmenter"), (self.without_fa, "without")):
            epochs = [r.epoch + 1 for r in records]
            axes[0].plot(epochs, [r.train_oa for r in records], label=label)
            axes[1].plot(epochs, [r.mean_loss for r in records], label=label)
        axes[0].set_xlabel("epoch")
        axes[0].set_ylabel("training accuracy")
        axes[1].set_xlabel("epoch")
        axes[1].set_ylabel("mean loss")
        for ax in axes:
            ax.grid(True, alpha=0.3)
            ax.legend()
        fig.tight_layout()

        path.parent.mkdir(parents=True, exist_ok=True)
        temp = path.with_suffix(path.suffix + ".tmp")
        fig.savefig(temp, format="svg")
        plt.close(fig)
        temp.replace(path)
        return path
