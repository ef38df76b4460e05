"""Cross-entropy loss and class weighting."""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np
import numpy.typing as npt

from pothole_seg.domain.autodiff import Tensor, record_op
from pothole_seg.shared.exceptions import CloudValidationError, DimensionError
from pothole_seg.shared.types import FloatArray


def log_softmax(logits: FloatArray) -> FloatArray:
    """Row-wise log-softmax with max shifting."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def cross_entropy(
    logits: Tensor,
    labels: npt.ArrayLike,
    weights: FloatArray | None = None,
) -> Tensor:
    """Mean negative log-likelihood of ``labels`` under ``softmax(logits)``.

    With ``weights``, point ``i`` counts ``weights[labels[i]]`` times and the
    loss is the weighted mean.

    Raises:
        DimensionError: If logits are not ``[N,C]`` or labels not ``[N]``
        CloudValidationError: If a label is outside ``[0, C)``
    """
    if logits.ndim != 2:
        raise DimensionError(f"cross_entropy expects [N,C] logits, got {logits.shape}")
    n, num_classes = logits.shape
    targets = np.asarray(labels, dtype=np.int64)
    if targets.shape != (n,):
        raise DimensionError(f"Expected {n} labels, got shape {targets.shape}")
    if targets.min() < 0 or targets.max() >= num_classes:
        raise CloudValidationError(
            f"Label ids must be in [0, {num_classes}), got {int(targets.min())}..{int(targets.max())}",
            num_classes=num_classes,
        )

    point_weights = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)[targets]
    total_weight = point_weights.sum()
    if total_weight <= 0.0:
        raise CloudValidationError("Class weights of the present labels sum to zero")

    log_probs = log_softmax(logits.data)
    rows = np.arange(n)
    loss = -(point_weights * log_probs[rows, targets]).sum() / total_weight

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        local = np.exp(log_probs)
        local[rows, targets] -= 1.0
        local *= (point_weights / total_weight)[:, None]
        return (grad * local,)

    return record_op("cross_entropy", np.array(loss), (logits,), backward)


def inverse_frequency_weights(label_sets: Iterable[npt.ArrayLike], num_classes: int) -> FloatArray:
    """Per-class weights ``total / (present_classes * count_c)``.

    Classes that never occur get weight 1.
    """
    counts = np.zeros(num_classes, dtype=np.float64)
    for labels in label_sets:
        counts += np.bincount(np.asarray(labels, dtype=np.int64), minlength=num_classes)[:num_classes]
    present = counts > 0
    weights = np.ones(num_classes, dtype=np.float64)
    if present.any():
        weights[present] = counts.sum() / (present.sum() * counts[present])
    return weights
