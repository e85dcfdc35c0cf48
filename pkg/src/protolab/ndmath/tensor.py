"""Dense tensors and the reverse-mode tape.

Operations executed inside ``with Tape() as tape:`` are recorded as nodes; outside a
tape nothing is recorded, so any computation done there is a constant for the
gradient. ``detach`` gives the same effect inside a tape.
"""

from __future__ import annotations

import threading
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from protolab.exceptions import NonFiniteError, ShapeMismatchError

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]

_local = threading.local()


def _tape_stack() -> list[Tape]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = []
        _local.stack = stack
    return stack


def active_tape() -> Tape | None:
    stack = _tape_stack()
    return stack[-1] if stack else None


@contextmanager
def no_tape() -> Iterator[None]:
    """Suspend recording: everything computed inside is a constant for gradients."""
    stack = _tape_stack()
    saved = stack[:]
    stack.clear()
    try:
        yield
    finally:
        stack[:] = saved


class Tensor:
    """An n-dimensional array of finite reals, optionally tracked for gradients."""

    __slots__ = ("data", "grad", "requires_grad", "name", "_tracked", "__weakref__")
    # ndarray (op) Tensor defers to the reflected Tensor operator
    __array_ufunc__ = None

    def __init__(
        self,
        data: np.ndarray | float | Sequence[float],
        requires_grad: bool = False,
        name: str | None = None,
        *,
        dtype: np.dtype | type | None = None,
        check_finite: bool = True,
    ):
        arr = np.asarray(data, dtype=dtype)
        if not np.issubdtype(arr.dtype, np.floating):
            arr = arr.astype(np.float64)
        if check_finite and not np.isfinite(arr).all():
            label = f" {name!r}" if name else ""
            raise NonFiniteError(f"Tensor{label} holds non-finite values")
        self.data: np.ndarray = np.ascontiguousarray(arr) if requires_grad else arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._tracked = requires_grad

    @classmethod
    def _from_op(cls, data: np.ndarray, tracked: bool) -> Tensor:
        out = cls.__new__(cls)
        out.data = data
        out.grad = None
        out.requires_grad = False
        out.name = None
        out._tracked = tracked
        return out

    # --- introspection ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def tracked(self) -> bool:
        """True when gradients can flow into this tensor."""
        return self._tracked

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self) -> str:
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label}, tracked={self._tracked})"

    # --- operator sugar (implemented in ops) -----------------------------

    def __add__(self, other):
        from protolab.ndmath import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from protolab.ndmath import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from protolab.ndmath import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from protolab.ndmath import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from protolab.ndmath import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from protolab.ndmath import ops
        return ops.mul(other, self)

    def __truediv__(self, other):
        from protolab.ndmath import ops
        return ops.div(self, other)

    def __rtruediv__(self, other):
        from protolab.ndmath import ops
        return ops.div(other, self)

    def __neg__(self):
        from protolab.ndmath import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from protolab.ndmath import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from protolab.ndmath import ops
        return ops.getitem(self, index)

    @property
    def T(self) -> Tensor:
        from protolab.ndmath import ops
        return ops.transpose(self)


def as_tensor(value: Tensor | np.ndarray | float, like: Tensor | None = None) -> Tensor:
    """Wrap a constant; tensors pass through unchanged."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype), check_finite=False)


def detach(x: Tensor) -> Tensor:
    """Same values, no gradient path."""
    return Tensor._from_op(x.data, tracked=False)


@dataclass
class _Node:
    out: Tensor
    parents: tuple[Tensor, ...]
    backward: BackwardFn


class Tape:
    """Records primitive operations for one reverse pass."""

    def __init__(self) -> None:
        self._nodes: list[_Node] = []

    def __enter__(self) -> Tape:
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self._nodes)

    def record(self, out: Tensor, parents: tuple[Tensor, ...], backward: BackwardFn) -> None:
        self._nodes.append(_Node(out, parents, backward))

    def backward(self, loss: Tensor) -> None:
        """Propagate d(loss)/d(leaf) into ``.grad`` of every leaf that requires it."""
        if loss.size != 1:
            raise ShapeMismatchError(f"backward needs a scalar loss, got shape {loss.shape}")
        if not np.isfinite(loss.data).all():
            raise NonFiniteError("loss is not finite")
        if not loss.tracked:
            return
        grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        if loss.requires_grad:
            _accumulate_leaf(loss, grads.pop(id(loss)))
        for node in reversed(self._nodes):
            g = grads.pop(id(node.out), None)
            if g is None:
                continue
            for parent, pg in zip(node.parents, node.backward(g), strict=True):
                if pg is None or not parent.tracked:
                    continue
                if parent.requires_grad:
                    _accumulate_leaf(parent, pg)
                else:
                    key = id(parent)
                    if key in grads:
                        grads[key] = grads[key] + pg
                    else:
                        grads[key] = pg

    def clear(self) -> None:
        self._nodes.clear()


def _accumulate_leaf(leaf: Tensor, g: np.ndarray) -> None:
    g = np.asarray(g, dtype=leaf.dtype).reshape(leaf.shape)
    if leaf.grad is None:
        leaf.grad = g.copy()
    else:
        leaf.grad += g


def make_op(data: np.ndarray, parents: Sequence[Tensor], backward: BackwardFn) -> Tensor:
    """Create an op output and record it if a tape is active and any parent is tracked."""
    tape = active_tape()
    tracked = tape is not None and any(p.tracked for p in parents)
    out = Tensor._from_op(data, tracked)
    if tracked:
        tape.record(out, tuple(parents), backward)
    return out
