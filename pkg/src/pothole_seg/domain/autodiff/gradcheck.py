"""Central finite-difference gradient checking."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from pothole_seg.domain.autodiff.tensor import Tape, Tensor


@dataclass(frozen=True)
class GradientCheckResult:
    """Outcome of a gradient check."""
    max_relative_error: float
    worst_tensor: str
    worst_index: tuple[int, ...]
    checked_entries: int

    def passed(self, tolerance: float) -> bool:
        return self.max_relative_error < tolerance


def numerical_gradient(
    loss_fn: Callable[[], Tensor],
    tensor: Tensor,
    index: tuple[int, ...],
    h: float = 1e-5,
) -> float:
    """Central difference of ``loss_fn`` with respect to one entry of ``tensor``."""
    original = tensor.data[index]
    tensor.data[index] = original + h
    plus = loss_fn().item()
    tensor.data[index] = original - h
    minus = loss_fn().item()
    tensor.data[index] = original
    return (plus - minus) / (2.0 * h)


def gradient_check(
    loss_fn: Callable[[], Tensor],
    tensors: Sequence[Tensor],
    h: float = 1e-5,
    floor: float = 1e-4,
    max_entries: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradientCheckResult:
    """Compare analytic gradients against central finite differences.

    ``loss_fn`` must be deterministic: it is called once under a tape and
    twice per checked entry without one. The relative error of an entry is
    ``|a - n| / max(|a|, |n|, floor)``.

    Args:
        loss_fn: Builds the scalar loss from the current tensor values
        tensors: Tensors whose gradients are checked (marked trainable)
        h: Finite-difference step
        floor: Lower bound of the error denominator
        max_entries: Check at most this many randomly chosen entries per tensor
        rng: Generator for entry sampling

    Returns:
        GradientCheckResult with the worst entry found
    """
    for tensor in tensors:
        tensor.requires_grad = True
        tensor.zero_grad()
    with Tape() as tape:
        loss = loss_fn()
    tape.backward(loss)
    analytic = [np.array(t.grad, copy=True) for t in tensors]

    sampler = rng if rng is not None else np.random.default_rng(0)
    worst = (0.0, "", ())
    checked = 0
    for position, (tensor, grad) in enumerate(zip(tensors, analytic, strict=True)):
        flat_indices = np.arange(tensor.size)
        if max_entries is not None and tensor.size > max_entries:
            flat_indices = sampler.choice(tensor.size, size=max_entries, replace=False)
        for flat in flat_indices:
            index = tuple(int(i) for i in np.unravel_index(int(flat), tensor.shape))
            numeric = numerical_gradient(loss_fn, tensor, index, h)
            exact = float(grad[index])
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), floor)
            checked += 1
            if error > worst[0]:
                worst = (error, tensor.name or f"tensor[{position}]", index)
    return GradientCheckResult(
        max_relative_error=worst[0],
        worst_tensor=worst[1],
        worst_index=worst[2],
        checked_entries=checked,
    )
