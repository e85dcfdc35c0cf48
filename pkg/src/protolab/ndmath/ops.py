"""Differentiable primitives.

Only what the prototype losses, the encoder and the soft actor-critic need. Each op
computes its forward value with numpy and registers a closure mapping the output
gradient to one gradient per parent (None for non-differentiable inputs).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from protolab.exceptions import ShapeMismatchError, ZeroNormError
from protolab.ndmath.tensor import Tensor, as_tensor, make_op

ZERO_NORM = 1e-12

Operand = Tensor | np.ndarray | float


def _pair(a: Operand, b: Operand) -> tuple[Tensor, Tensor]:
    if isinstance(a, Tensor):
        return a, as_tensor(b, like=a)
    b = as_tensor(b)
    return as_tensor(a, like=b), b


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# --- elementwise arithmetic ----------------------------------------------

def add(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    return make_op(
        a.data + b.data, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    return make_op(
        a.data - b.data, (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    return make_op(
        a.data * b.data, (a, b),
        lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)),
    )


def div(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    out = a.data / b.data
    return make_op(
        out, (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.shape),
            _unbroadcast(-g * out / b.data, b.shape),
        ),
    )


def neg(x: Tensor) -> Tensor:
    return make_op(-x.data, (x,), lambda g: (-g,))


def square(x: Tensor) -> Tensor:
    return make_op(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,))


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return make_op(out, (x,), lambda g: (g / (2.0 * out),))


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return make_op(out, (x,), lambda g: (g * out,))


def log(x: Tensor, floor: float = 0.0) -> Tensor:
    """Natural log of max(x, floor); below the floor the gradient is zero."""
    if floor > 0.0:
        safe = np.maximum(x.data, floor)
        live = x.data > floor
        return make_op(np.log(safe), (x,), lambda g: (np.where(live, g / safe, 0.0),))
    return make_op(np.log(x.data), (x,), lambda g: (g / x.data,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_op(x.data * mask, (x,), lambda g: (g * mask,))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return make_op(out, (x,), lambda g: (g * (1.0 - out * out),))


def minimum(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    take_a = a.data <= b.data
    return make_op(
        np.where(take_a, a.data, b.data), (a, b),
        lambda g: (
            _unbroadcast(np.where(take_a, g, 0.0), a.shape),
            _unbroadcast(np.where(take_a, 0.0, g), b.shape),
        ),
    )


# --- linear algebra and reductions ---------------------------------------

def matmul(a: Operand, b: Operand) -> Tensor:
    a, b = _pair(a, b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeMismatchError(f"matmul of {a.shape} and {b.shape}")
    return make_op(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def sum(
    x: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False,
) -> Tensor:
    shape = x.shape

    def backward(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return make_op(np.sum(x.data, axis=axis, keepdims=keepdims), (x,), backward)


def mean(x: Tensor, axis: int | tuple[int, ...] | None = None, keepdims: bool = False) -> Tensor:
    count = x.size if axis is None else int(np.prod([x.shape[i] for i in np.atleast_1d(axis)]))
    return div(sum(x, axis=axis, keepdims=keepdims), float(count))


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = x.shape
    return make_op(x.data.reshape(shape), (x,), lambda g: (g.reshape(original),))


def transpose(x: Tensor, axes: tuple[int, ...] | None = None) -> Tensor:
    axes = tuple(reversed(range(x.ndim))) if axes is None else axes
    inverse = tuple(np.argsort(axes))
    return make_op(x.data.transpose(axes), (x,), lambda g: (g.transpose(inverse),))


def getitem(x: Tensor, index) -> Tensor:
    """Basic (non-fancy) indexing."""
    shape = x.shape

    def backward(g: np.ndarray):
        full = np.zeros(shape, dtype=g.dtype)
        full[index] = g
        return (full,)

    return make_op(x.data[index], (x,), backward)


def concat(tensors: Sequence[Operand], axis: int = -1) -> Tensor:
    parts = [t if isinstance(t, Tensor) else as_tensor(t) for t in tensors]
    sizes = [p.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]
    return make_op(
        np.concatenate([p.data for p in parts], axis=axis),
        tuple(parts),
        lambda g: tuple(np.split(g, splits, axis=axis)),
    )


# --- normalizations -------------------------------------------------------

def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)
    return make_op(
        out, (x,),
        lambda g: (out * (g - (g * out).sum(axis=axis, keepdims=True)),),
    )


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    probs = np.exp(out)
    return make_op(out, (x,), lambda g: (g - probs * g.sum(axis=axis, keepdims=True),))


def l2_normalize(x: Tensor, axis: int = -1) -> Tensor:
    """Unit-norm rows (or vectors along ``axis``)."""
    norm = np.linalg.norm(x.data, axis=axis, keepdims=True)
    if (norm < ZERO_NORM).any():
        raise ZeroNormError("cannot normalize a vector with norm < 1e-12")
    out = x.data / norm
    return make_op(
        out, (x,),
        lambda g: ((g - out * (g * out).sum(axis=axis, keepdims=True)) / norm,),
    )


def layer_norm(x: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance (no affine part)."""
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    sigma = np.sqrt((centered * centered).mean(axis=-1, keepdims=True) + eps)
    xhat = centered / sigma

    def backward(g: np.ndarray):
        g_mean = g.mean(axis=-1, keepdims=True)
        gx_mean = (g * xhat).mean(axis=-1, keepdims=True)
        return ((g - g_mean - xhat * gx_mean) / sigma,)

    return make_op(xhat, (x,), backward)


# --- convolution ----------------------------------------------------------

def conv2d(x: Tensor, weight: Tensor, bias: Tensor | None = None, stride: int = 1) -> Tensor:
    """Valid 2-D cross-correlation, NCHW input, (out, in, kh, kw) weight."""
    if x.ndim != 4 or weight.ndim != 4 or x.shape[1] != weight.shape[1]:
        raise ShapeMismatchError(f"conv2d input {x.shape} vs weight {weight.shape}")
    n, c, h, w = x.shape
    out_c, _, kh, kw = weight.shape
    ho = (h - kh) // stride + 1
    wo = (w - kw) // stride + 1
    if ho < 1 or wo < 1:
        raise ShapeMismatchError(f"conv2d kernel {kh}x{kw} larger than input {h}x{w}")

    windows = sliding_window_view(x.data, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
    # (n, c, ho, wo, kh, kw) x (out, c, kh, kw) -> (n, ho, wo, out)
    out = np.tensordot(windows, weight.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    out = np.ascontiguousarray(out)

    def backward(g: np.ndarray):
        gw = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3]))
        gx = np.zeros_like(x.data)
        for i in range(kh):
            for j in range(kw):
                contrib = np.tensordot(g, weight.data[:, :, i, j], axes=([1], [0]))
                gx[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride] += (
                    contrib.transpose(0, 3, 1, 2)
                )
        gb = g.sum(axis=(0, 2, 3)) if bias is not None else None
        return (gx, gw, gb) if bias is not None else (gx, gw)

    parents = (x, weight, bias) if bias is not None else (x, weight)
    return make_op(out, parents, backward)


def unit_rows(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Plain-array counterpart of ``l2_normalize`` (no tape)."""
    a = np.asarray(a)
    if not np.issubdtype(a.dtype, np.floating):
        a = a.astype(np.float64)
    norm = np.linalg.norm(a, axis=axis, keepdims=True)
    if (norm < ZERO_NORM).any():
        raise ZeroNormError("cannot normalize a vector with norm < 1e-12")
    return a / norm
