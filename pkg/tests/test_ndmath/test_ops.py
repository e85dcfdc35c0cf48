"""Primitive ops: values and finite-difference gradients at float64."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.exceptions import ZeroNormError
from protolab.ndmath import ParamSet, Tensor, grad_check, l2_normalize, ops


def _param(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.standard_normal(shape), requires_grad=True)


def test_l2_normalize_examples() -> None:
    np.testing.assert_allclose(l2_normalize(np.array([3.0, 4.0])), [0.6, 0.8])
    np.testing.assert_allclose(l2_normalize(np.array([1.0, 0.0])), [1.0, 0.0])
    with pytest.raises(ZeroNormError):
        l2_normalize(np.array([0.0, 0.0]))


def test_l2_normalize_tensor_stays_on_tape() -> None:
    out = l2_normalize(Tensor(np.array([[3.0, 4.0]])))
    assert isinstance(out, Tensor)
    np.testing.assert_allclose(out.data, [[0.6, 0.8]])


def test_grad_check_quadratic() -> None:
    x = Tensor(np.array([3.0]), requires_grad=True)
    err = grad_check(lambda: ops.sum(x * x), ParamSet({"x": x}), eps=1e-5)
    assert err < 1e-8


@pytest.mark.parametrize("seed", range(5))
def test_elementwise_and_reduction_gradients(seed: int) -> None:
    rng = np.random.default_rng(seed)
    a = _param(rng, 3, 4)
    b = _param(rng, 4)
    params = ParamSet({"a": a, "b": b})

    def fn() -> Tensor:
        h = ops.tanh(a * b + 0.5) - ops.exp(a * 0.1) / (ops.square(b) + 1.0)
        return ops.mean(ops.relu(h) + ops.minimum(a, b)) + ops.sum(ops.log_softmax(a, axis=1))

    assert grad_check(fn, params) < 1e-4


@pytest.mark.parametrize("seed", range(5))
def test_matmul_concat_layer_norm_gradients(seed: int) -> None:
    rng = np.random.default_rng(100 + seed)
    x = _param(rng, 5, 3)
    w = _param(rng, 4, 2)
    params = ParamSet({"x": x, "w": w})

    def fn() -> Tensor:
        h = ops.concat([x, ops.softmax(x, axis=1)[:, :1]], axis=1)
        return ops.sum(ops.layer_norm(h @ w) * np.array([1.0, -2.0]))

    assert grad_check(fn, params) < 1e-4


@pytest.mark.parametrize("seed", range(3))
def test_conv2d_gradients(seed: int) -> None:
    rng = np.random.default_rng(200 + seed)
    x = _param(rng, 2, 2, 6, 6)
    w = _param(rng, 3, 2, 3, 3)
    b = _param(rng, 3)
    params = ParamSet({"x": x, "w": w, "b": b})

    def fn() -> Tensor:
        return ops.sum(ops.square(ops.conv2d(x, w, b, stride=2)))

    assert grad_check(fn, params) < 1e-4


def test_conv2d_matches_direct_loop() -> None:
    rng = np.random.default_rng(7)
    x = rng.standard_normal((1, 2, 5, 5))
    w = rng.standard_normal((1, 2, 3, 3))
    out = ops.conv2d(Tensor(x), Tensor(w)).data
    expected = np.zeros((1, 1, 3, 3))
    for i in range(3):
        for j in range(3):
            expected[0, 0, i, j] = np.sum(x[0, :, i:i + 3, j:j + 3] * w[0])
    np.testing.assert_allclose(out, expected, atol=1e-12)


def test_l2_normalize_gradient() -> None:
    rng = np.random.default_rng(9)
    c = _param(rng, 4, 3)
    weights = rng.standard_normal((4, 3))
    err = grad_check(lambda: ops.sum(ops.l2_normalize(c, axis=1) * weights), ParamSet({"c": c}))
    assert err < 1e-4


def test_log_floor_zeroes_gradient_below_floor() -> None:
    from protolab.ndmath import Tape

    x = Tensor(np.array([1e-20, 0.5]), requires_grad=True)
    with Tape() as tape:
        y = ops.log(x, floor=1e-12)
        tape.backward(ops.sum(y))
    np.testing.assert_allclose(y.data, [np.log(1e-12), np.log(0.5)])
    np.testing.assert_allclose(x.grad, [0.0, 2.0])
