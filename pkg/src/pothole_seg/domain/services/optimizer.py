"""Adam optimizer."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from pothole_seg.domain.autodiff import ParameterRegistry
from pothole_seg.domain.models import TrainConfig
from pothole_seg.shared.exceptions import DimensionError
from pothole_seg.shared.types import FloatArray


@dataclass
class AdamState:
    """First and second moment estimates keyed by parameter name."""
    step: int = 0
    m: dict[str, FloatArray] = field(default_factory=dict)
    v: dict[str, FloatArray] = field(default_factory=dict)

    @classmethod
    def zeros(cls, params: Mapping[str, FloatArray]) -> AdamState:
        return cls(
            step=0,
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
        )

    def copy(self) -> AdamState:
        return AdamState(
            step=self.step,
            m={k: v.copy() for k, v in self.m.items()},
            v={k: v.copy() for k, v in self.v.items()},
        )


def adam_step(
    params: Mapping[str, FloatArray],
    grads: Mapping[str, FloatArray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[dict[str, FloatArray], AdamState]:
    """One bias-corrected Adam update.

    Returns:
        Tuple of (new parameter values, new state); inputs are not modified

    Raises:
        DimensionError: If a gradient or moment shape differs from its parameter
    """
    step = state.step + 1
    new_params: dict[str, FloatArray] = {}
    new_state = AdamState(step=step)
    correction1 = 1.0 - beta1**step
    correction2 = 1.0 - beta2**step

    for name, value in params.items():
        grad = grads[name]
        m = state.m.get(name)
        v = state.v.get(name)
        if m is None or v is None:
            m, v = np.zeros_like(value), np.zeros_like(value)
        if grad.shape != value.shape or m.shape != value.shape or v.shape != value.shape:
            raise DimensionError(
                f"Adam shape mismatch for {name}: param {value.shape}, grad {grad.shape}, "
                f"moments {m.shape}/{v.shape}",
                name=name,
            )
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        new_params[name] = value - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_state.m[name] = m
        new_state.v[name] = v
    return new_params, new_state


class Adam:
    """Adam bound to a parameter registry; updates parameters in place."""

    def __init__(self, registry: ParameterRegistry, config: TrainConfig | None = None) -> None:
        config = config or TrainConfig()
        self.registry = registry
        self.beta1 = config.adam_beta1
        self.beta2 = config.adam_beta2
        self.eps = config.adam_eps
        self.state = AdamState.zeros(registry.state())

    @property
    def steps(self) -> int:
        return self.state.step

    def step(self, lr: float) -> None:
        params = {name: p.data for name, p in self.registry.items()}
        grads = {
            name: p.grad if p.grad is not None else np.zeros_like(p.data)
            for name, p in self.registry.items()
        }
        updated, self.state = adam_step(
            params, grads, self.state, lr, self.beta1, self.beta2, self.eps
        )
        for name, param in self.registry.items():
            param.data = updated[name]

    def load_state(self, state: AdamState) -> None:
        names = set(self.registry.names())
        if set(state.m) != names or set(state.v) != names:
            raise DimensionError("Optimizer state does not match the parameter registry")
        self.state = state.copy()
