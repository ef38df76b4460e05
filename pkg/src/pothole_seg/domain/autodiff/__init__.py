"""Minimal dense-tensor engine with reverse-mode automatic differentiation."""

from pothole_seg.domain.autodiff.gradcheck import GradientCheckResult, gradient_check
from pothole_seg.domain.autodiff.layers import LinearLayer, Mlp, ParameterRegistry
from pothole_seg.domain.autodiff.ops import (
    add,
    as_tensor,
    concat,
    dropout,
    gather_rows,
    matmul,
    max_pool_axis,
    mean_all,
    mul,
    relu,
    repeat_rows,
    reshape,
    scale,
    sub,
    sum_all,
)
from pothole_seg.domain.autodiff.tensor import Tape, Tensor, active_tape, backward, record_op

__all__ = [
    "GradientCheckResult",
    "LinearLayer",
    "Mlp",
    "ParameterRegistry",
    "Tape",
    "Tensor",
    "active_tape",
    "add",
    "as_tensor",
    "backward",
    "concat",
    "dropout",
    "gather_rows",
    "gradient_check",
    "matmul",
    "max_pool_axis",
    "mean_all",
    "mul",
    "record_op",
    "relu",
    "repeat_rows",
    "reshape",
    "scale",
    "sub",
    "sum_all",
]
