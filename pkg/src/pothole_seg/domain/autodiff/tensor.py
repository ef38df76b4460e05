"""Dense tensors and the reverse-mode tape.

A ``Tensor`` wraps a float64 numpy array. Operations executed while a
``Tape`` is active (``with Tape() as tape: ...``) append an entry holding the
inputs, the output and a backward rule. ``Tape.backward`` replays the rules in
reverse order and leaves gradients on every tensor that requires them.

The active tape is held in a context variable, so independent tapes can be
built concurrently from different threads.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterable, Sequence
from contextvars import ContextVar, Token
from dataclasses import dataclass
from typing import Any

import numpy as np

from pothole_seg.shared.exceptions import DimensionError, TapeError
from pothole_seg.shared.types import FloatArray

BackwardRule = Callable[[FloatArray], Sequence[FloatArray | None]]

_node_ids = itertools.count()
_active_tape: ContextVar[Tape | None] = ContextVar("active_tape", default=None)


def _check_extents(shape: tuple[int, ...]) -> None:
    if any(extent < 1 for extent in shape):
        raise DimensionError(f"Tensor extents must be >= 1, got {shape}", shape=shape)


class Tensor:
    """Dense float64 array participating in the autodiff graph."""

    __slots__ = ("data", "grad", "name", "node_id", "requires_grad")

    def __init__(self, data: Any, requires_grad: bool = False, name: str | None = None) -> None:
        array = np.array(data, dtype=np.float64)
        _check_extents(array.shape)
        self.data: FloatArray = array
        self.grad: FloatArray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self.node_id = next(_node_ids)

    @classmethod
    def wrap(cls, array: FloatArray, requires_grad: bool = False) -> Tensor:
        """Wrap an existing float64 array without copying it."""
        tensor = cls.__new__(cls)
        _check_extents(array.shape)
        tensor.data = array
        tensor.grad = None
        tensor.requires_grad = requires_grad
        tensor.name = None
        tensor.node_id = next(_node_ids)
        return tensor

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        """Return the value of a one-element tensor as a Python float."""
        if self.size != 1:
            raise DimensionError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def numpy(self) -> FloatArray:
        """Return a copy of the underlying values."""
        return self.data.copy()

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label}, requires_grad={self.requires_grad})"

    # Operator sugar; the implementations live in ``ops``.
    def __add__(self, other: Any) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.add(self, other)

    def __radd__(self, other: Any) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.add(other, self)

    def __sub__(self, other: Any) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.sub(other, self)

    def __mul__(self, other: Any) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        if isinstance(other, int | float):
            return ops.scale(self, float(other))
        return ops.mul(self, other)

    def __rmul__(self, other: Any) -> Tensor:
        return self.__mul__(other)

    def __neg__(self) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.scale(self, -1.0)

    def __matmul__(self, other: Tensor) -> Tensor:
        from pothole_seg.domain.autodiff import ops
        return ops.matmul(self, other)


@dataclass(frozen=True)
class TapeEntry:
    """One recorded operation."""
    op: str
    inputs: tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class Tape:
    """Ordered record of the operations of one forward pass."""

    def __init__(self) -> None:
        self._entries: list[TapeEntry] = []
        self._token: Token[Tape | None] | None = None
        self._consumed = False

    def __enter__(self) -> Tape:
        self._token = _active_tape.set(self)
        return self

    def __exit__(self, *exc_info: object) -> None:
        if self._token is not None:
            _active_tape.reset(self._token)
            self._token = None

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def consumed(self) -> bool:
        return self._consumed

    def record(self, entry: TapeEntry) -> None:
        if self._consumed:
            raise TapeError("Cannot record on a tape that was already consumed by backward()")
        self._entries.append(entry)

    def ops(self) -> list[str]:
        """Names of the recorded operations, in recording order."""
        return [entry.op for entry in self._entries]

    def backward(self, loss: Tensor, parameters: Iterable[Tensor] = ()) -> None:
        """Populate gradients of every tensor on the tape with respect to ``loss``.

        Leaf tensors (parameters) accumulate into an existing ``grad``;
        intermediate tensors receive their gradient fresh. Leaves the loss
        does not reach, on the tape or in ``parameters``, end with a zero
        ``grad`` when they had none. The tape is consumed afterwards.

        Raises:
            DimensionError: If ``loss`` has more than one element
            TapeError: If the tape is empty or already consumed
        """
        if loss.size != 1:
            raise DimensionError(f"backward() needs a scalar loss, got shape {loss.shape}")
        if self._consumed:
            raise TapeError("Tape was already consumed by a previous backward()")
        if not self._entries:
            raise TapeError("Tape is empty: nothing was recorded during the forward pass")

        grads: dict[int, FloatArray] = {loss.node_id: np.ones_like(loss.data)}
        leaves: dict[int, Tensor] = {}
        produced = {entry.output.node_id for entry in self._entries}
        unreached = {
            tensor.node_id: tensor
            for entry in self._entries
            for tensor in entry.inputs
            if tensor.requires_grad and tensor.node_id not in produced
        }
        unreached.update((p.node_id, p) for p in parameters)

        for entry in reversed(self._entries):
            out_grad = grads.pop(entry.output.node_id, None)
            if out_grad is None:
                continue
            entry.output.grad = out_grad
            for tensor, grad in zip(entry.inputs, entry.backward(out_grad), strict=True):
                if grad is None or not tensor.requires_grad:
                    continue
                key = tensor.node_id
                grads[key] = grads[key] + grad if key in grads else grad
                leaves[key] = tensor

        # Whatever is left was not produced on this tape: parameters and inputs.
        for key, grad in grads.items():
            leaf = leaves.get(key)
            if leaf is None:
                continue
            leaf.grad = grad if leaf.grad is None else leaf.grad + grad
        for leaf in unreached.values():
            if leaf.grad is None:
                leaf.zero_grad()

        self._entries.clear()
        self._consumed = True


def active_tape() -> Tape | None:
    """Return the tape currently recording in this context, if any."""
    return _active_tape.get()


def record_op(
    op: str,
    data: FloatArray,
    inputs: Sequence[Tensor],
    backward: BackwardRule,
) -> Tensor:
    """Create the output tensor of an operation and record it on the active tape.

    Nothing is recorded when no tape is active or no input requires a gradient.
    """
    requires_grad = any(tensor.requires_grad for tensor in inputs)
    out = Tensor.wrap(np.asarray(data, dtype=np.float64), requires_grad=requires_grad)
    tape = _active_tape.get()
    if requires_grad and tape is not None:
        tape.record(TapeEntry(op=op, inputs=tuple(inputs), output=out, backward=backward))
    return out


def backward(loss: Tensor, tape: Tape | None = None, parameters: Iterable[Tensor] = ()) -> None:
    """Run the backward pass of ``tape`` (default: the active tape).

    Raises:
        TapeError: If no tape is given and none is active
    """
    target = tape if tape is not None else _active_tape.get()
    if target is None:
        raise TapeError("backward() called without an active tape")
    target.backward(loss, parameters)
