"""End-to-end runs: collect, pretrain, finetune, train and metrics in a fixed order.

A run lives in ``<run_root>/<config hash[:12]>``, hashed with every phase enabled. Phases
that are not listed reuse the artifacts an earlier run left in the same directory; those
are recorded as inputs in the manifest with their hashes.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

from protolab.collect import DomainBuffer, collect_many, load_buffer, save_buffer
from protolab.config import (
    PHASES,
    RunConfig,
    config_hash,
    get_settings,
    serialize_config,
    validate_config,
)
from protolab.exceptions import InsufficientDataError, PhaseError
from protolab.metrics import (
    coverage,
    linear_probe,
    pca_buffers,
    write_coverage_csv,
    write_pca_csv,
    write_probe_csv,
)
from protolab.metrics.probe import MIN_LABELED
from protolab.pipeline.manifest import (
    ArtifactEntry,
    RunManifest,
    file_sha256,
    read_manifest,
    write_manifest,
)
from protolab.protolearn import (
    PrototypeBank,
    finetune,
    load_encoder,
    pretrain,
    save_encoder,
    write_pretrain_log,
)
from protolab.protolearn.networks import EncoderStack
from protolab.rlagent import evaluate_random_policy, save_agent, train_downstream, write_eval_log
from protolab.seeding import derive_seed, named_seeds

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"
ENCODER_FILE = "encoder.ckpt"
FINETUNED_FILE = "encoder_finetuned.ckpt"


def run_directory(config: RunConfig, run_root: str | Path | None = None) -> Path:
    """Runs that differ only in their phase selection share a directory."""
    root = Path(run_root) if run_root is not None else get_settings().run_root
    every_phase = config.model_copy(update={"phases": list(PHASES)})
    return root / config_hash(every_phase)[:12]


@dataclass
class RunState:
    config: RunConfig
    run_dir: Path
    seeds: dict[str, int]
    buffers: dict[str, DomainBuffer] = field(default_factory=dict)
    stack: EncoderStack | None = None
    bank: PrototypeBank | None = None
    artifacts: list[ArtifactEntry] = field(default_factory=list)
    inputs: dict[str, str] = field(default_factory=dict)

    def record(self, kind: str, path: Path) -> Path:
        self.artifacts.append(ArtifactEntry(
            kind=kind, path=path.relative_to(self.run_dir).as_posix(), sha256=file_sha256(path),
        ))
        return path

    def buffer_path(self, domain: str) -> Path:
        return self.run_dir / "buffers" / f"{domain}.crptbuf"

    def buffer(self, domain: str) -> DomainBuffer:
        if domain not in self.buffers:
            path = self.buffer_path(domain)
            if not path.exists():
                raise InsufficientDataError(f"no buffer for {domain}; run the collect phase")
            self.buffers[domain] = load_buffer(path)
            self.inputs[path.relative_to(self.run_dir).as_posix()] = file_sha256(path)
        return self.buffers[domain]

    def encoder(self) -> tuple[EncoderStack, PrototypeBank]:
        if self.stack is None or self.bank is None:
            for name in (FINETUNED_FILE, ENCODER_FILE):
                path = self.run_dir / name
                if path.exists():
                    self.stack, self.bank = load_encoder(path)
                    self.inputs[name] = file_sha256(path)
                    break
            else:
                raise InsufficientDataError("no encoder checkpoint; run the pretrain phase")
        return self.stack, self.bank


@dataclass
class PipelineResult:
    run_dir: Path
    manifest: RunManifest
    state: RunState


def _collect_domains(config: RunConfig) -> list[str]:
    names = list(config.domains)
    if "finetune" in config.phases and config.finetune_domain not in names:
        names.append(config.finetune_domain)
    return names


def _phase_collect(state: RunState) -> None:
    cfg = state.config
    names = _collect_domains(cfg)
    seeds = {name: derive_seed(state.seeds["collect"], name) for name in names}
    buffers = collect_many(names, seeds, env=cfg.env, collect=cfg.collect)
    for name, buf in buffers.items():
        state.buffers[name] = buf
        state.record("buffer", save_buffer(buf, state.buffer_path(name)))


def _phase_pretrain(state: RunState) -> None:
    cfg = state.config
    buffers = [state.buffer(name) for name in cfg.domains]
    result = pretrain(
        buffers, cfg.ssl, state.seeds["ssl"],
        frame_stack=cfg.env.frame_stack, dtype=cfg.dtype,
    )
    state.stack, state.bank = result.stack, result.bank
    meta = {"config_hash": config_hash(cfg), "domains": list(cfg.domains)}
    state.record(
        "encoder", save_encoder(state.run_dir / ENCODER_FILE, result.stack, result.bank, meta),
    )
    state.record("pretrain_log", write_pretrain_log(result.log, state.run_dir / "pretrain_log.csv"))


def _phase_finetune(state: RunState) -> None:
    cfg = state.config
    if state.stack is None or state.bank is None:
        path = state.run_dir / ENCODER_FILE
        if not path.exists():
            raise InsufficientDataError("finetuning needs a pre-trained encoder")
        state.stack, state.bank = load_encoder(path)
        state.inputs[ENCODER_FILE] = file_sha256(path)
    domain = cfg.finetune_domain or ""
    result = finetune(
        state.stack, state.bank, state.buffer(domain), cfg.ssl, state.seeds["finetune"],
        frame_stack=cfg.env.frame_stack,
    )
    state.stack, state.bank = result.stack, result.bank
    meta = {"config_hash": config_hash(cfg), "finetune_domain": cfg.finetune_domain}
    state.record(
        "encoder", save_encoder(state.run_dir / FINETUNED_FILE, result.stack, result.bank, meta),
    )
    state.record("finetune_log", write_pretrain_log(result.log, state.run_dir / "finetune_log.csv"))


def _phase_train(state: RunState) -> None:
    cfg = state.config
    stack, bank = state.encoder()
    for domain in cfg.downstream_domains:
        seed = derive_seed(state.seeds["rl"], domain)
        result = train_downstream(domain, stack, bank, cfg, seed)
        out = state.run_dir / "downstream" / domain
        state.record("eval_log", write_eval_log(result.log, out / "eval_log.csv"))
        state.record("agent", save_agent(out / "agent.ckpt", result.agent, {"domain": domain}))
        baseline = evaluate_random_policy(
            domain, cfg.env,
            episodes=cfg.rl.eval_episodes, seed=derive_seed(state.seeds["eval"], domain),
        )
        state.record("baseline_log", write_eval_log([baseline], out / "random_baseline.csv"))


def _phase_metrics(state: RunState) -> None:
    cfg = state.config
    stack, bank = state.encoder()
    out = state.run_dir / "metrics"
    k = min(cfg.ssl.coverage_k, bank.count - 1)
    state.record("coverage", write_coverage_csv(coverage(bank, k), out / "coverage.csv", "final"))

    buffers = [state.buffer(name) for name in cfg.domains]
    pca = pca_buffers(
        buffers, stack, frame_stack=cfg.env.frame_stack, seed=state.seeds["metrics"],
    )
    state.record("pca", write_pca_csv(pca, out / "pca.csv"))

    probes = []
    for buf in buffers:
        if buf.states is None or len(buf) < MIN_LABELED:
            logger.warning(
                "[Pipeline] skipping linear probe for %s: too few labeled frames", buf.domain,
            )
            continue
        probes.append(linear_probe(
            buf, stack, seed=state.seeds["metrics"], frame_stack=cfg.env.frame_stack,
        ))
    if probes:
        state.record("probe", write_probe_csv(probes, out / "probe.csv"))


PHASE_RUNNERS: dict[str, Callable[[RunState], None]] = {
    "collect": _phase_collect,
    "pretrain": _phase_pretrain,
    "finetune": _phase_finetune,
    "train": _phase_train,
    "metrics": _phase_metrics,
}


def run_pipeline(config: RunConfig, *, run_root: str | Path | None = None) -> PipelineResult:
    """Run the configured phases in canonical order and write the manifest."""
    run_dir = run_directory(config, run_root)
    run_dir.mkdir(parents=True, exist_ok=True)
    state = RunState(config=config, run_dir=run_dir, seeds=named_seeds(config.seed))
    phases = [p for p in PHASES if p in config.phases]
    logger.info("[Pipeline] run %s: phases %s", run_dir.name, ", ".join(phases) or "none")
    for phase in phases:
        logger.info("[Pipeline] phase %s", phase)
        try:
            PHASE_RUNNERS[phase](state)
        except Exception as e:
            raise PhaseError(phase, e) from e

    manifest = RunManifest(
        config_hash=config_hash(config),
        seeds={name: state.seeds[name] for name in ("collect", "ssl", "rl", "eval")},
        phases=phases,
        artifacts=state.artifacts,
        inputs=state.inputs,
        config_text=serialize_config(config),
    )
    write_manifest(manifest, run_dir / MANIFEST_NAME)
    logger.info("[Pipeline] wrote %d artifact(s) to %s", len(state.artifacts), run_dir)
    return PipelineResult(run_dir=run_dir, manifest=manifest, state=state)


def rerun_manifest(path: str | Path, *, run_root: str | Path | None = None) -> PipelineResult:
    """Run again from the config embedded in a manifest."""
    manifest = read_manifest(path)
    config = validate_config(manifest.config_text)
    if config_hash(config) != manifest.config_hash:
        logger.warning(
            "[Pipeline] manifest hash %s does not match its config text", manifest.config_hash[:12],
        )
    return run_pipeline(config, run_root=run_root)
