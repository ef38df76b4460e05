"""Differentiable operators.

Each operator computes its forward value with numpy and registers a backward
rule through ``record_op``. Inputs that are not tensors are wrapped as
constants.
"""

from __future__ import annotations

from collections.abc import Sequence
from typing import Any

import numpy as np

from pothole_seg.domain.autodiff.tensor import Tensor, record_op
from pothole_seg.shared.exceptions import (
    AutodiffError,
    BroadcastError,
    DimensionError,
    GatherIndexError,
)
from pothole_seg.shared.types import FloatArray, IndexArray


def as_tensor(value: Any) -> Tensor:
    """Return ``value`` unchanged if it is a tensor, else wrap it as a constant."""
    return value if isinstance(value, Tensor) else Tensor(value)


def _normalize_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise DimensionError(f"Axis {axis} out of range for a {ndim}-d tensor", axis=axis)
    return axis % ndim


def _unbroadcast(grad: FloatArray, shape: tuple[int, ...]) -> FloatArray:
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a: Tensor, b: Tensor) -> tuple[int, ...]:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as e:
        raise BroadcastError(
            f"Shapes {a.shape} and {b.shape} cannot be broadcast", left=a.shape, right=b.shape
        ) from e


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of ``[m,k]`` and ``[k,n]``."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(
            f"matmul shape mismatch: {a.shape} @ {b.shape}", left=a.shape, right=b.shape
        )
    a_data, b_data = a.data, b.data

    def backward(grad: FloatArray) -> tuple[FloatArray, FloatArray]:
        return grad @ b_data.T, a_data.T @ grad

    return record_op("matmul", a_data @ b_data, (a, b), backward)


def relu(x: Tensor) -> Tensor:
    """Elementwise ``max(x, 0)``; NaN propagates and the subgradient at 0 is 0."""
    mask = x.data > 0

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (grad * mask,)

    return record_op("relu", np.maximum(x.data, 0.0), (x,), backward)


def max_pool_axis(x: Tensor, axis: int) -> tuple[Tensor, IndexArray]:
    """Reduce ``axis`` to extent 1 by maximum.

    Returns:
        Tuple of (pooled values with the axis kept, argmax per output slot).
        Ties go to the lowest index.
    """
    axis = _normalize_axis(axis, x.ndim)
    winners = np.argmax(x.data, axis=axis, keepdims=True)
    values = np.take_along_axis(x.data, winners, axis=axis)
    shape = x.shape

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        routed = np.zeros(shape, dtype=np.float64)
        np.put_along_axis(routed, winners, grad, axis=axis)
        return (routed,)

    pooled = record_op("max_pool", values, (x,), backward)
    return pooled, np.squeeze(winners, axis=axis).astype(np.int64)


def concat(xs: Sequence[Tensor], axis: int) -> Tensor:
    """Concatenate tensors along ``axis``."""
    if not xs:
        raise DimensionError("concat needs at least one tensor")
    first = xs[0]
    axis = _normalize_axis(axis, first.ndim)
    for x in xs[1:]:
        same_rank = x.ndim == first.ndim
        if not same_rank or any(
            x.shape[i] != first.shape[i] for i in range(first.ndim) if i != axis
        ):
            raise DimensionError(
                f"concat shape mismatch on axis {axis}: {[t.shape for t in xs]}",
                shapes=[t.shape for t in xs],
            )
    if len(xs) == 1:
        return first

    offsets = np.cumsum([x.shape[axis] for x in xs])[:-1]

    def backward(grad: FloatArray) -> list[FloatArray]:
        return np.split(grad, offsets, axis=axis)

    return record_op("concat", np.concatenate([x.data for x in xs], axis=axis), xs, backward)


def repeat_rows(g: Tensor, n: int) -> Tensor:
    """Stack ``n`` copies of a ``[1,d]`` row into ``[n,d]``."""
    if g.ndim != 2 or g.shape[0] != 1:
        raise DimensionError(f"repeat_rows expects a [1,d] tensor, got {g.shape}")
    if n < 1:
        raise DimensionError(f"repeat_rows needs n >= 1, got {n}", n=n)

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (grad.sum(axis=0, keepdims=True),)

    return record_op("repeat_rows", np.repeat(g.data, n, axis=0), (g,), backward)


def add(a: Any, b: Any) -> Tensor:
    """Elementwise sum with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    a_shape, b_shape = a.shape, b.shape

    def backward(grad: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(grad, a_shape), _unbroadcast(grad, b_shape)

    return record_op("add", a.data + b.data, (a, b), backward)


def sub(a: Any, b: Any) -> Tensor:
    """Elementwise difference with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    a_shape, b_shape = a.shape, b.shape

    def backward(grad: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(grad, a_shape), _unbroadcast(-grad, b_shape)

    return record_op("sub", a.data - b.data, (a, b), backward)


def mul(a: Any, b: Any) -> Tensor:
    """Elementwise product with broadcasting."""
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    a_data, b_data = a.data, b.data

    def backward(grad: FloatArray) -> tuple[FloatArray, FloatArray]:
        return _unbroadcast(grad * b_data, a_data.shape), _unbroadcast(grad * a_data, b_data.shape)

    return record_op("mul", a_data * b_data, (a, b), backward)


def scale(x: Tensor, factor: float) -> Tensor:
    """Multiply every element by a constant."""

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (grad * factor,)

    return record_op("scale", x.data * factor, (x,), backward)


def reshape(x: Tensor, shape: Sequence[int]) -> Tensor:
    """Reshape without changing the row-major element order."""
    original = x.shape
    try:
        values = x.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"Cannot reshape {original} to {tuple(shape)}") from e

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (grad.reshape(original),)

    return record_op("reshape", values, (x,), backward)


def sum_all(x: Tensor) -> Tensor:
    """Sum of all elements as a 0-d tensor."""
    shape = x.shape

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (np.full(shape, float(grad), dtype=np.float64),)

    return record_op("sum", np.array(x.data.sum()), (x,), backward)


def mean_all(x: Tensor) -> Tensor:
    """Mean of all elements as a 0-d tensor."""
    shape, count = x.shape, x.size

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (np.full(shape, float(grad) / count, dtype=np.float64),)

    return record_op("mean", np.array(x.data.mean()), (x,), backward)


def gather_rows(x: Tensor, idx: Any) -> Tensor:
    """Row lookup: ``[n,d]`` indexed by ``[m]`` or ``[m,k]``.

    Gradients of repeated indices accumulate into the same source row.
    """
    if x.ndim != 2:
        raise DimensionError(f"gather_rows expects a 2-d source, got {x.shape}")
    index = np.asarray(idx, dtype=np.int64)
    if index.ndim not in (1, 2):
        raise DimensionError(f"gather_rows index must be 1-d or 2-d, got {index.shape}")
    rows = x.shape[0]
    if index.size and (index.min() < 0 or index.max() >= rows):
        raise GatherIndexError(
            f"Row index out of bounds for {rows} rows (range {index.min()}..{index.max()})",
            rows=rows,
        )
    shape = x.shape

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        scattered = np.zeros(shape, dtype=np.float64)
        np.add.at(scattered, index, grad)
        return (scattered,)

    return record_op("gather_rows", x.data[index], (x,), backward)


def dropout(x: Tensor, rate: float, training: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout: survivors are scaled by ``1/(1-rate)`` at train time.

    Inference mode and ``rate == 0`` are the identity.
    """
    if not 0.0 <= rate < 1.0:
        raise AutodiffError(f"Dropout rate must be in [0, 1), got {rate}", rate=rate)
    if not training or rate == 0.0:
        return x
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)

    def backward(grad: FloatArray) -> tuple[FloatArray]:
        return (grad * mask,)

    return record_op("dropout", x.data * mask, (x,), backward)
