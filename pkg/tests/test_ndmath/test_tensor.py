"""Tape recording, detach, no_tape and leaf gradient accumulation."""

from __future__ import annotations

import numpy as np
import pytest

from protolab.exceptions import NonFiniteError, ShapeMismatchError
from protolab.ndmath import Tape, Tensor, detach, no_tape, ops


def test_outside_tape_nothing_is_recorded() -> None:
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    y = ops.sum(x * x)
    assert not y.tracked


def test_backward_square() -> None:
    x = Tensor(np.array([3.0]), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(x * x)
        tape.backward(loss)
    np.testing.assert_allclose(x.grad, [6.0])


def test_gradients_accumulate_across_backward_calls() -> None:
    x = Tensor(np.array([2.0]), requires_grad=True)
    for _ in range(2):
        with Tape() as tape:
            tape.backward(ops.sum(x * 3.0))
    np.testing.assert_allclose(x.grad, [6.0])


def test_detach_blocks_gradient() -> None:
    x = Tensor(np.array([1.5, -0.5]), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(detach(x) * x)
        tape.backward(loss)
    # d/dx (c . x) with c = x held constant
    np.testing.assert_allclose(x.grad, x.data)


def test_no_tape_suspends_recording() -> None:
    x = Tensor(np.array([1.0]), requires_grad=True)
    with Tape() as tape:
        with no_tape():
            constant = x * 4.0
        assert not constant.tracked
        loss = ops.sum(constant * x)
        tape.backward(loss)
    np.testing.assert_allclose(x.grad, [4.0])


def test_backward_requires_scalar() -> None:
    x = Tensor(np.ones(3), requires_grad=True)
    with Tape() as tape:
        y = x * 2.0
        with pytest.raises(ShapeMismatchError):
            tape.backward(y)


def test_non_finite_leaf_rejected() -> None:
    with pytest.raises(NonFiniteError):
        Tensor(np.array([np.nan]))


def test_non_finite_loss_rejected() -> None:
    x = Tensor(np.array([0.0]), requires_grad=True)
    with Tape() as tape:
        loss = ops.sum(ops.log(x))
        with pytest.raises(NonFiniteError):
            tape.backward(loss)


def test_ndarray_on_the_left_defers_to_tensor() -> None:
    x = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with Tape() as tape:
        y = np.array([3.0, 4.0]) - x
        assert isinstance(y, Tensor)
        tape.backward(ops.sum(y))
    np.testing.assert_allclose(x.grad, [-1.0, -1.0])
