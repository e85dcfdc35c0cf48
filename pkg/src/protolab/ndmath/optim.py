"""Adam optimizer over a ParamSet."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from protolab.ndmath.params import ParamSet


@dataclass
class OptimizerState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    step: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        for beta in (self.beta1, self.beta2):
            if not 0.0 < beta < 1.0:
                raise ValueError(f"moment decay must lie in (0, 1), got {beta}")


class Adam:
    """Adam with bias correction. No implicit weight decay.

    Parameters whose gradient was never populated since the last ``zero_grad`` are
    left untouched, as are their moments.
    """

    def __init__(
        self,
        params: ParamSet,
        lr: float,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = params
        self.state = OptimizerState(
            lr=lr, beta1=betas[0], beta2=betas[1], eps=eps, weight_decay=weight_decay,
        )
        for name, tensor in params.items():
            self.state.first_moment[name] = np.zeros_like(tensor.data)
            self.state.second_moment[name] = np.zeros_like(tensor.data)

    def zero_grad(self) -> None:
        self.params.zero_grad()

    def step(self) -> None:
        st = self.state
        st.step += 1
        correction1 = 1.0 - st.beta1 ** st.step
        correction2 = 1.0 - st.beta2 ** st.step
        for name, tensor in self.params.items():
            if tensor.grad is None:
                continue
            g = tensor.grad
            if st.weight_decay:
                g = g + st.weight_decay * tensor.data
            m = st.first_moment[name]
            v = st.second_moment[name]
            m *= st.beta1
            m += (1.0 - st.beta1) * g
            v *= st.beta2
            v += (1.0 - st.beta2) * g * g
            update = (m / correction1) / (np.sqrt(v / correction2) + st.eps)
            tensor.data -= (st.lr * update).astype(tensor.dtype, copy=False)
        self.params.step += 1
