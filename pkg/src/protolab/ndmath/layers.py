"""Parameterized layers built from ndmath primitives."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from protolab.ndmath import ops
from protolab.ndmath.params import ParamSet
from protolab.ndmath.tensor import Tensor


def orthogonal(rng: np.random.Generator, rows: int, cols: int, gain: float = 1.0) -> np.ndarray:
    """Orthogonal (semi-orthogonal for non-square) matrix."""
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return gain * q[:rows, :cols]


class Module:
    """Anything with named parameters."""

    def parameters(self) -> ParamSet:
        raise NotImplementedError


class Linear(Module):
    def __init__(
        self,
        in_features: int,
        out_features: int,
        rng: np.random.Generator,
        *,
        gain: float = 1.0,
        dtype: np.dtype | type = np.float32,
    ):
        self.in_features = in_features
        self.out_features = out_features
        self.weight = Tensor(
            orthogonal(rng, in_features, out_features, gain).astype(dtype), requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_features, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias

    def parameters(self) -> ParamSet:
        return ParamSet({"weight": self.weight, "bias": self.bias})


class Conv2d(Module):
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        *,
        stride: int = 1,
        dtype: np.dtype | type = np.float32,
    ):
        fan_in = in_channels * kernel_size * kernel_size
        scale = np.sqrt(2.0 / fan_in)
        self.stride = stride
        self.weight = Tensor(
            (rng.standard_normal((out_channels, in_channels, kernel_size, kernel_size)) * scale)
            .astype(dtype),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_channels, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.conv2d(x, self.weight, self.bias, stride=self.stride)

    def output_size(self, size: int) -> int:
        return (size - self.weight.shape[2]) // self.stride + 1

    def parameters(self) -> ParamSet:
        return ParamSet({"weight": self.weight, "bias": self.bias})


class LayerNorm(Module):
    def __init__(self, features: int, *, dtype: np.dtype | type = np.float32):
        self.gamma = Tensor(np.ones(features, dtype=dtype), requires_grad=True)
        self.beta = Tensor(np.zeros(features, dtype=dtype), requires_grad=True)

    def __call__(self, x: Tensor) -> Tensor:
        return ops.layer_norm(x) * self.gamma + self.beta

    def parameters(self) -> ParamSet:
        return ParamSet({"gamma": self.gamma, "beta": self.beta})


class MLP(Module):
    """Linear layers with ReLU between them (none after the last)."""

    def __init__(
        self,
        sizes: Sequence[int],
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        if len(sizes) < 2:
            raise ValueError("MLP needs at least input and output sizes")
        last = len(sizes) - 2
        self.layers = [
            Linear(a, b, rng, gain=1.0 if i == last else np.sqrt(2.0), dtype=dtype)
            for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:], strict=True))
        ]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = ops.relu(x)
        return x

    def parameters(self) -> ParamSet:
        return ParamSet.merged({f"l{i}": layer.parameters() for i, layer in enumerate(self.layers)})
