"""Named parameter collections and EMA tracking."""

from __future__ import annotations

from collections.abc import Iterator, Mapping

import numpy as np

from protolab.exceptions import ShapeMismatchError
from protolab.ndmath.tensor import Tensor


class ParamSet(Mapping[str, Tensor]):
    """Trainable tensors keyed by unique dotted names, plus an update-step counter.

    Tensors are held by reference: layers and optimizers built over the same set see
    each other's updates.
    """

    def __init__(self, params: Mapping[str, Tensor] | None = None, step: int = 0):
        self._params: dict[str, Tensor] = {}
        self.step = step
        for name, tensor in (params or {}).items():
            self.add(name, tensor)

    def add(self, name: str, tensor: Tensor) -> Tensor:
        if name in self._params:
            raise ValueError(f"duplicate parameter name: {name}")
        if not tensor.requires_grad:
            raise ValueError(f"parameter {name} must require gradients")
        tensor.name = name
        self._params[name] = tensor
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    @classmethod
    def merged(cls, groups: Mapping[str, ParamSet]) -> ParamSet:
        """Combine sets under name prefixes, sharing the underlying tensors."""
        out = cls()
        for prefix, group in groups.items():
            for name, tensor in group._params.items():
                out._params[f"{prefix}.{name}" if prefix else name] = tensor
        return out

    def grad(self, name: str) -> np.ndarray:
        """Gradient of ``name``; zeros when nothing has flowed into it."""
        tensor = self._params[name]
        return tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)

    def zero_grad(self) -> None:
        for tensor in self._params.values():
            tensor.grad = None

    def num_scalars(self) -> int:
        return int(sum(t.size for t in self._params.values()))

    def copy(self) -> ParamSet:
        """Independent deep copy (values only, no gradients)."""
        return ParamSet(
            {name: Tensor(t.data.copy(), requires_grad=True) for name, t in self._params.items()},
            step=self.step,
        )

    def check_compatible(self, other: ParamSet) -> None:
        if set(self._params) != set(other._params):
            missing = sorted(set(self._params) ^ set(other._params))
            raise ShapeMismatchError(f"parameter names differ: {missing}")
        for name, tensor in self._params.items():
            if tensor.shape != other._params[name].shape:
                raise ShapeMismatchError(
                    f"{name}: shape {tensor.shape} vs {other._params[name].shape}"
                )

    def assign(self, other: ParamSet) -> None:
        """Copy values from ``other`` in place."""
        self.check_compatible(other)
        for name, tensor in self._params.items():
            tensor.data[...] = other._params[name].data

    def to_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.data for name, t in self._params.items()}

    def load_arrays(self, arrays: Mapping[str, np.ndarray]) -> None:
        for name, tensor in self._params.items():
            if name not in arrays:
                raise ShapeMismatchError(f"missing parameter {name}")
            value = arrays[name]
            if value.shape != tensor.shape:
                raise ShapeMismatchError(f"{name}: shape {value.shape} vs {tensor.shape}")
            tensor.data[...] = value

    def astype(self, dtype: np.dtype | type) -> ParamSet:
        return ParamSet(
            {n: Tensor(t.data.astype(dtype), requires_grad=True) for n, t in self._params.items()},
            step=self.step,
        )


def ema_update(target: ParamSet, online: ParamSet, eta: float) -> ParamSet:
    """target <- (1 - eta) * target + eta * online, in place; returns ``target``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"EMA momentum must lie in [0, 1], got {eta}")
    target.check_compatible(online)
    for name, tensor in target.items():
        tensor.data[...] = (1.0 - eta) * tensor.data + eta * online[name].data
    target.step += 1
    return target
