"""Cross-domain prototypical pre-training and single-domain finetuning.

Each update draws one buffer in cyclic order, samples B temporal pairs, builds Sinkhorn
targets from the EMA projection of the next frames, and minimizes L_SSL over the online
encoder, projector, predictor and prototypes. The EMA targets follow after every update.
"""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from protolab.collect import DomainBuffer, sample_pairs
from protolab.config import SslConfig
from protolab.exceptions import InsufficientDataError, StorageIOError
from protolab.metrics.coverage import coverage
from protolab.ndmath.checkpoint import load_checkpoint, save_checkpoint
from protolab.ndmath.ops import unit_rows
from protolab.ndmath.optim import Adam
from protolab.ndmath.params import ParamSet, ema_update
from protolab.ndmath.tensor import Tape
from protolab.protolearn.augment import augment_shift
from protolab.protolearn.losses import LossTerms, assign_probs, loss_terms
from protolab.protolearn.networks import EncoderSpec, EncoderStack, PrototypeBank
from protolab.sinkhorn import assignment_targets, score_matrix

logger = logging.getLogger(__name__)

LOG_FIELDS = ("step", "buffer", "l_comp", "l_intr", "l_ssl", "ane", "kne")


def choose_buffer(index: int, n: int) -> int:
    """Buffer used at update ``index`` when cycling through ``n`` buffers."""
    if n < 1:
        raise ValueError(f"need at least one buffer, got {n}")
    return index % n


@dataclass
class PretrainRecord:
    step: int
    buffer: int
    l_comp: float
    l_intr: float
    l_ssl: float
    ane: float | None = None
    kne: float | None = None


@dataclass
class PretrainResult:
    stack: EncoderStack
    bank: PrototypeBank
    log: list[PretrainRecord] = field(default_factory=list)

    def buffer_usage(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for rec in self.log:
            counts[rec.buffer] = counts.get(rec.buffer, 0) + 1
        return counts


def init_models(
    spec: EncoderSpec, seed: int, *, dtype: np.dtype | type = np.float32,
) -> tuple[EncoderStack, PrototypeBank]:
    """Seeded initial encoder stack and prototype bank."""
    rng = np.random.default_rng([seed & 0xFFFF_FFFF_FFFF_FFFF, 0])
    stack = EncoderStack(spec, rng, dtype=dtype)
    bank = PrototypeBank.random(spec.prototypes, spec.latent_dim, rng, dtype=dtype)
    return stack, bank


class PrototypeLearner:
    """One optimizer over (theta, psi, prototypes) plus the EMA target rule."""

    def __init__(
        self,
        stack: EncoderStack,
        bank: PrototypeBank,
        config: SslConfig,
        *,
        frame_stack: int = 3,
    ):
        self.stack = stack
        self.bank = bank
        self.config = config
        self.frame_stack = frame_stack
        self.params = ParamSet.merged({
            "": stack.online_parameters(),
            "bank": bank.parameters(),
        })
        self.optimizer = Adam(self.params, lr=config.lr)

    def step(self, buffer: DomainBuffer, rng: np.random.Generator) -> LossTerms:
        cfg = self.config
        x, x_next = sample_pairs(buffer, cfg.batch_size, rng, self.frame_stack)
        x = augment_shift(x, cfg.shift_pad, rng)
        x_next = augment_shift(x_next, cfg.shift_pad, rng)

        z_target = self.stack.project_target(x_next)
        scores = score_matrix(unit_rows(z_target.astype(np.float64)), self.bank.unit())
        plan = assignment_targets(scores, cfg.sinkhorn_iterations, cfg.sinkhorn_epsilon)
        q = plan.rows(renormalize=cfg.renormalize_targets)

        self.optimizer.zero_grad()
        with Tape() as tape:
            c_hat = self.bank.normalized()
            u = self.stack.predict(self.stack.project_online(x))
            p = assign_probs(u, c_hat, cfg.temperature)
            terms = loss_terms(p, q, c_hat, cfg)
            tape.backward(terms.total)
        self.optimizer.step()
        ema_update(
            self.stack.target_parameters(), self.stack.tracked_parameters(), cfg.ema_momentum,
        )
        return terms


def pretrain(
    buffers: Sequence[DomainBuffer],
    config: SslConfig,
    seed: int,
    *,
    spec: EncoderSpec | None = None,
    stack: EncoderStack | None = None,
    bank: PrototypeBank | None = None,
    steps: int | None = None,
    frame_stack: int = 3,
    dtype: np.dtype | type = np.float32,
    phase: str = "Pretrain",
) -> PretrainResult:
    """Run ``steps`` (default I_p) updates cycling over ``buffers``."""
    steps = config.pretrain_steps if steps is None else steps
    if not buffers:
        raise InsufficientDataError("pre-training needs at least one buffer")
    if stack is None or bank is None:
        if spec is None:
            h, _, c = buffers[0].frame_shape
            spec = EncoderSpec(
                in_channels=frame_stack * c,
                render_size=h,
                conv_channels=tuple(config.conv_channels),
                conv_strides=tuple(config.conv_strides),
                kernel_size=config.kernel_size,
                latent_dim=config.latent_dim,
                predictor_hidden=config.predictor_hidden,
                prototypes=config.prototypes,
            )
        stack, bank = init_models(spec, seed, dtype=dtype)

    result = PretrainResult(stack=stack, bank=bank)
    if steps == 0:
        return result
    for buf in buffers:
        if buf.num_pairs < config.batch_size:
            raise InsufficientDataError(
                f"{buf.domain}: {buf.num_pairs} temporal pairs, batch needs {config.batch_size}"
            )

    learner = PrototypeLearner(stack, bank, config, frame_stack=frame_stack)
    rng = np.random.default_rng([seed & 0xFFFF_FFFF_FFFF_FFFF, 1])
    n = len(buffers)
    logger.info(
        "[%s] %d updates over %d buffer(s): %s",
        phase, steps, n, ", ".join(b.domain for b in buffers),
    )
    for i in range(steps):
        o = choose_buffer(i, n)
        terms = learner.step(buffers[o], rng)
        comp, intr, total = terms.values()
        record = PretrainRecord(step=i + 1, buffer=o, l_comp=comp, l_intr=intr, l_ssl=total)
        if config.coverage_interval and (i + 1) % config.coverage_interval == 0:
            report = coverage(bank, min(config.coverage_k, bank.count - 1))
            record.ane, record.kne = report.ane, report.kne
            logger.info(
                "[%s] step %d/%d: L_comp=%.4f L_intr=%.4f ANE=%.4f KNE=%.4f",
                phase, i + 1, steps, comp, intr, report.ane, report.kne,
            )
        else:
            logger.debug("[%s] step %d: L_ssl=%.5f (buffer %d)", phase, i + 1, total, o)
        result.log.append(record)
    return result


def finetune(
    stack: EncoderStack,
    bank: PrototypeBank,
    buffer: DomainBuffer,
    config: SslConfig,
    seed: int,
    *,
    frame_stack: int = 3,
) -> PretrainResult:
    """The pre-training update rule on one buffer for I_f steps, on copies of the inputs."""
    return pretrain(
        [buffer], config, seed,
        stack=stack.copy(), bank=bank.copy(),
        steps=config.finetune_steps, frame_stack=frame_stack, phase="Finetune",
    )


# --- logs and checkpoints ----------------------------------------------------

def write_pretrain_log(records: Sequence[PretrainRecord], path: str | Path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(LOG_FIELDS)
            for rec in records:
                writer.writerow([
                    rec.step, rec.buffer,
                    repr(rec.l_comp), repr(rec.l_intr), repr(rec.l_ssl),
                    "" if rec.ane is None else repr(rec.ane),
                    "" if rec.kne is None else repr(rec.kne),
                ])
    except OSError as e:
        raise StorageIOError(f"cannot write training log {path}: {e}") from e
    return path


def save_encoder(
    path: str | Path,
    stack: EncoderStack,
    bank: PrototypeBank,
    metadata: dict[str, Any] | None = None,
) -> Path:
    tensors = stack.state_arrays()
    tensors["prototypes"] = bank.raw.data
    meta = {"architecture": stack.spec.to_dict(), "dtype": stack.dtype.name, **(metadata or {})}
    return save_checkpoint(path, tensors, meta)


def load_encoder(path: str | Path) -> tuple[EncoderStack, PrototypeBank]:
    ckpt = load_checkpoint(path)
    spec = EncoderSpec.from_dict(ckpt.metadata["architecture"])
    dtype = np.dtype(ckpt.metadata.get("dtype", "float32"))
    stack = EncoderStack(spec, np.random.default_rng(0), dtype=dtype)
    tensors = dict(ckpt.tensors)
    bank = PrototypeBank(tensors.pop("prototypes"), dtype=dtype)
    stack.load_state_arrays(tensors)
    return stack, bank
