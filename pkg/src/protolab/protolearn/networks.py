"""Encoder, projector, predictor, their EMA targets, and the prototype bank."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from protolab.config import RunConfig
from protolab.exceptions import ShapeMismatchError, ZeroNormError
from protolab.ndmath import ops
from protolab.ndmath.layers import MLP, Conv2d, Linear, Module
from protolab.ndmath.params import ParamSet
from protolab.ndmath.tensor import Tensor, no_tape

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncoderSpec:
    """Architecture of an EncoderStack; stored with every checkpoint."""
    in_channels: int
    render_size: int
    conv_channels: tuple[int, ...] = (32, 32, 32, 32)
    conv_strides: tuple[int, ...] = (2, 1, 1, 1)
    kernel_size: int = 3
    latent_dim: int = 32
    predictor_hidden: int = 64
    prototypes: int = 64

    @classmethod
    def from_config(cls, config: RunConfig) -> EncoderSpec:
        channels = 3 if config.env.rgb else 1
        return cls(
            in_channels=config.env.frame_stack * channels,
            render_size=config.env.render_size,
            conv_channels=tuple(config.ssl.conv_channels),
            conv_strides=tuple(config.ssl.conv_strides),
            kernel_size=config.ssl.kernel_size,
            latent_dim=config.ssl.latent_dim,
            predictor_hidden=config.ssl.predictor_hidden,
            prototypes=config.ssl.prototypes,
        )

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["conv_channels"] = list(self.conv_channels)
        out["conv_strides"] = list(self.conv_strides)
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> EncoderSpec:
        data = dict(data)
        data["conv_channels"] = tuple(data["conv_channels"])
        data["conv_strides"] = tuple(data["conv_strides"])
        return cls(**data)


def to_nchw(frames: np.ndarray, dtype: np.dtype | type = np.float32) -> Tensor:
    """(B, H, W, C) pixels to a constant (B, C, H, W) tensor."""
    frames = np.asarray(frames)
    if frames.ndim == 3:
        frames = frames[None]
    return Tensor(np.ascontiguousarray(frames.transpose(0, 3, 1, 2), dtype=dtype))


class ConvEncoder(Module):
    """f: stacked frames -> flat representation. ReLU after every convolution."""

    def __init__(
        self,
        in_channels: int,
        render_size: int,
        channels: Sequence[int],
        strides: Sequence[int],
        kernel_size: int,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.convs: list[Conv2d] = []
        size, c_in = render_size, in_channels
        for c_out, stride in zip(channels, strides, strict=True):
            conv = Conv2d(c_in, c_out, kernel_size, rng, stride=stride, dtype=dtype)
            size = conv.output_size(size)
            if size < 1:
                raise ShapeMismatchError(
                    f"convolution stack collapses a {render_size}px input to nothing"
                )
            self.convs.append(conv)
            c_in = c_out
        self.out_size = size
        self.repr_dim = c_in * size * size

    def __call__(self, x: Tensor) -> Tensor:
        for conv in self.convs:
            x = ops.relu(conv(x))
        return ops.reshape(x, (x.shape[0], self.repr_dim))

    def parameters(self) -> ParamSet:
        return ParamSet.merged({f"conv{i}": conv.parameters() for i, conv in enumerate(self.convs)})


class EncoderStack:
    """Online encoder/projector/predictor plus EMA target encoder/projector."""

    def __init__(
        self,
        spec: EncoderSpec,
        rng: np.random.Generator,
        *,
        dtype: np.dtype | type = np.float32,
    ):
        self.spec = spec
        self.dtype = np.dtype(dtype)
        conv_args = (
            spec.in_channels, spec.render_size, spec.conv_channels, spec.conv_strides,
            spec.kernel_size,
        )
        self.encoder = ConvEncoder(*conv_args, rng, dtype=dtype)
        self.projector = Linear(self.encoder.repr_dim, spec.latent_dim, rng, dtype=dtype)
        self.predictor = MLP(
            [spec.latent_dim, spec.predictor_hidden, spec.latent_dim], rng, dtype=dtype,
        )
        self.target_encoder = ConvEncoder(*conv_args, rng, dtype=dtype)
        self.target_projector = Linear(self.encoder.repr_dim, spec.latent_dim, rng, dtype=dtype)
        self.target_parameters().assign(self.tracked_parameters())

    @property
    def repr_dim(self) -> int:
        return self.encoder.repr_dim

    # --- parameter views ---------------------------------------------------

    def online_parameters(self) -> ParamSet:
        """theta and psi: everything the optimizer updates."""
        return ParamSet.merged({
            "encoder": self.encoder.parameters(),
            "projector": self.projector.parameters(),
            "predictor": self.predictor.parameters(),
        })

    def tracked_parameters(self) -> ParamSet:
        """The online encoder and projector, which the targets follow."""
        return ParamSet.merged({
            "encoder": self.encoder.parameters(),
            "projector": self.projector.parameters(),
        })

    def target_parameters(self) -> ParamSet:
        return ParamSet.merged({
            "encoder": self.target_encoder.parameters(),
            "projector": self.target_projector.parameters(),
        })

    # --- forward paths -----------------------------------------------------

    def encode(self, frames: np.ndarray | Tensor) -> Tensor:
        x = frames if isinstance(frames, Tensor) else to_nchw(frames, self.dtype)
        return self.encoder(x)

    def project_online(self, frames: np.ndarray | Tensor) -> Tensor:
        """z = g(f(x))."""
        return self.projector(self.encode(frames))

    def predict(self, z: Tensor) -> Tensor:
        """u = v(z); same dimension as z."""
        return self.predictor(z)

    def project_target(self, frames: np.ndarray) -> np.ndarray:
        """z_target from the EMA networks; never recorded on a tape."""
        with no_tape():
            x = to_nchw(frames, self.dtype)
            return self.target_projector(self.target_encoder(x)).data

    def embed(self, frames: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Frozen f(x) for analysis and downstream features, in batches."""
        out = []
        with no_tape():
            for start in range(0, len(frames), batch_size):
                out.append(self.encode(frames[start:start + batch_size]).data)
        if not out:
            return np.zeros((0, self.repr_dim), dtype=self.dtype)
        return np.concatenate(out, axis=0)

    def project(self, frames: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Frozen z = g(f(x)) for the exploration reward."""
        out = []
        with no_tape():
            for start in range(0, len(frames), batch_size):
                out.append(self.project_online(frames[start:start + batch_size]).data)
        if not out:
            return np.zeros((0, self.spec.latent_dim), dtype=self.dtype)
        return np.concatenate(out, axis=0)

    def project_features(self, features: np.ndarray) -> np.ndarray:
        """g(y) for features already produced by ``embed``."""
        with no_tape():
            return self.projector(Tensor(np.asarray(features, dtype=self.dtype))).data

    # --- state -------------------------------------------------------------

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {f"online.{k}": v for k, v in self.online_parameters().to_arrays().items()}
        arrays.update({f"target.{k}": v for k, v in self.target_parameters().to_arrays().items()})
        return arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.online_parameters().load_arrays(
            {k.removeprefix("online."): v for k, v in arrays.items() if k.startswith("online.")}
        )
        self.target_parameters().load_arrays(
            {k.removeprefix("target."): v for k, v in arrays.items() if k.startswith("target.")}
        )

    def copy(self) -> EncoderStack:
        clone = EncoderStack(self.spec, np.random.default_rng(0), dtype=self.dtype)
        clone.load_state_arrays({k: v.copy() for k, v in self.state_arrays().items()})
        return clone


class PrototypeBank(Module):
    """M trainable prototype vectors; losses use their l2-normalized view."""

    def __init__(self, raw: np.ndarray, *, dtype: np.dtype | type | None = None):
        raw = np.array(raw, dtype=dtype if dtype is not None else np.asarray(raw).dtype)
        if raw.ndim != 2 or raw.shape[0] < 2:
            raise ShapeMismatchError(f"need at least 2 prototypes as rows, got shape {raw.shape}")
        if (np.linalg.norm(raw, axis=1) <= ops.ZERO_NORM).any():
            raise ZeroNormError("every prototype needs a non-zero norm")
        self.raw = Tensor(raw, requires_grad=True, name="prototypes")

    @classmethod
    def random(
        cls, count: int, dim: int, rng: np.random.Generator, *, dtype: np.dtype | type = np.float32,
    ) -> PrototypeBank:
        """i.i.d. standard normal entries."""
        return cls(rng.standard_normal((count, dim)), dtype=dtype)

    @property
    def count(self) -> int:
        return self.raw.shape[0]

    @property
    def dim(self) -> int:
        return self.raw.shape[1]

    def normalized(self) -> Tensor:
        """c_hat rows, recorded when a tape is active."""
        return ops.l2_normalize(self.raw, axis=1)

    def unit(self) -> np.ndarray:
        return ops.unit_rows(self.raw.data, axis=1)

    def parameters(self) -> ParamSet:
        return ParamSet({"prototypes": self.raw})

    def copy(self) -> PrototypeBank:
        return PrototypeBank(self.raw.data.copy())
