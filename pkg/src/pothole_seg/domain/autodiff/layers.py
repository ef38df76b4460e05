"""Trainable layers and the parameter registry."""

from __future__ import annotations

from collections.abc import Iterator, Mapping, Sequence

import numpy as np

from pothole_seg.domain.autodiff.ops import add, matmul, relu, reshape
from pothole_seg.domain.autodiff.tensor import Tensor
from pothole_seg.shared.exceptions import AutodiffError, DimensionError
from pothole_seg.shared.types import FloatArray


class ParameterRegistry:
    """Named, ordered collection of trainable tensors.

    Every parameter appears exactly once; the insertion order is the
    serialization order of checkpoints.
    """

    def __init__(self) -> None:
        self._params: dict[str, Tensor] = {}

    def register(self, name: str, tensor: Tensor) -> Tensor:
        """Register ``tensor`` under ``name`` and mark it trainable.

        Raises:
            AutodiffError: If the name or the tensor is already registered
        """
        if name in self._params:
            raise AutodiffError(f"Parameter name already registered: {name}", name=name)
        if any(existing is tensor for existing in self._params.values()):
            raise AutodiffError(f"Tensor registered twice (second name {name})", name=name)
        tensor.requires_grad = True
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def __len__(self) -> int:
        return len(self._params)

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self._params.values())

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._params.items())

    def names(self) -> list[str]:
        return list(self._params)

    def get(self, name: str) -> Tensor:
        return self._params[name]

    def count(self) -> int:
        """Total number of trainable scalars."""
        return sum(p.size for p in self._params.values())

    def breakdown(self) -> dict[str, int]:
        """Scalar counts grouped by the first segment of the parameter name."""
        groups: dict[str, int] = {}
        for name, param in self._params.items():
            head = name.split(".", 1)[0]
            groups[head] = groups.get(head, 0) + param.size
        return groups

    def zero_grad(self) -> None:
        for param in self._params.values():
            param.zero_grad()

    def non_finite(self) -> list[str]:
        """Names of parameters holding NaN or infinite values."""
        return [name for name, p in self._params.items() if not np.all(np.isfinite(p.data))]

    def state(self) -> dict[str, FloatArray]:
        """Copy of every parameter value keyed by name."""
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_state(self, state: Mapping[str, FloatArray]) -> None:
        """Overwrite parameter values from ``state``.

        Raises:
            DimensionError: If names or shapes differ from the registry
        """
        missing = set(self._params) - set(state)
        unexpected = set(state) - set(self._params)
        if missing or unexpected:
            raise DimensionError(
                f"Parameter set mismatch: missing={sorted(missing)}, unexpected={sorted(unexpected)}"
            )
        for name, param in self._params.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise DimensionError(
                    f"Shape mismatch for {name}: expected {param.shape}, got {value.shape}",
                    name=name,
                )
            param.data = value.copy()


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> FloatArray:
    """Uniform in ``[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]``."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class LinearLayer:
    """Affine map ``x @ W + b`` applied to the last axis of a 2-d or 3-d input."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
    ) -> None:
        if in_dim < 1 or out_dim < 1:
            raise DimensionError(f"Linear layer {name} needs positive widths, got {in_dim}->{out_dim}")
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = registry.register(f"{name}.weight", Tensor(glorot_uniform(in_dim, out_dim, rng)))
        self.bias = registry.register(f"{name}.bias", Tensor(np.zeros(out_dim)))

    @staticmethod
    def parameter_count(in_dim: int, out_dim: int) -> int:
        return in_dim * out_dim + out_dim

    def __call__(self, x: Tensor) -> Tensor:
        if x.shape[-1] != self.in_dim:
            raise DimensionError(
                f"Linear layer {self.weight.name} expects width {self.in_dim}, got {x.shape}",
                expected=self.in_dim,
            )
        if x.ndim == 2:
            return add(matmul(x, self.weight), self.bias)
        lead = x.shape[:-1]
        flat = reshape(x, (-1, self.in_dim))
        return reshape(add(matmul(flat, self.weight), self.bias), (*lead, self.out_dim))


class Mlp:
    """Pointwise stack of linear layers with ReLU between them.

    ``final_activation`` also applies ReLU after the last layer.
    """

    def __init__(
        self,
        widths: Sequence[int],
        registry: ParameterRegistry,
        name: str,
        rng: np.random.Generator,
        final_activation: bool = False,
    ) -> None:
        if len(widths) < 2:
            raise DimensionError(f"MLP {name} needs at least two widths, got {list(widths)}")
        self.widths = list(widths)
        self.final_activation = final_activation
        self.layers = [
            LinearLayer(widths[i], widths[i + 1], registry, f"{name}.{i}", rng)
            for i in range(len(widths) - 1)
        ]

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]

    @staticmethod
    def parameter_count(widths: Sequence[int]) -> int:
        return sum(LinearLayer.parameter_count(a, b) for a, b in zip(widths, widths[1:], strict=False))

    def __call__(self, x: Tensor) -> Tensor:
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < last or self.final_activation:
                x = relu(x)
        return x
