"""Run configuration: pydantic sections, presets and the flat ``key = value`` format.

A config file looks like::

    # two-domain desk run
    preset = desk
    seed = 3
    domains = pendulum, point_mass
    ssl.temperature = 0.1
    rl.beta = 0.2

Top-level RunConfig fields are written bare; section fields as ``section.field``. Values
are read as YAML scalars (or flow sequences); list fields also take comma-separated text.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from protolab.exceptions import ConfigInvalidError, StorageIOError

logger = logging.getLogger(__name__)

PHASES = ("collect", "pretrain", "finetune", "train", "metrics")
SECTIONS = ("env", "collect", "ssl", "rl")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class EnvConfig(_Section):
    render_size: int = Field(32, ge=16)
    rgb: bool = False
    frame_stack: int = Field(3, ge=1)
    episode_length: int = Field(200, gt=0)   # physics substeps
    action_repeat: int = Field(2, gt=0)
    dt: float = Field(0.05, gt=0)
    integrator_substeps: int = Field(10, gt=0)


class CollectConfig(_Section):
    capacity: int = Field(10_000, gt=0)      # I_s, frames per domain
    steps: int = Field(10_000, ge=0)
    workers: int = Field(1, ge=1)
    record_states: bool = True


class SslConfig(_Section):
    prototypes: int = Field(64, ge=2)        # M
    latent_dim: int = Field(32, gt=0)        # d
    batch_size: int = Field(64, gt=0)
    predictor_hidden: int = Field(64, gt=0)
    conv_channels: tuple[int, ...] = (32, 32, 32, 32)
    conv_strides: tuple[int, ...] = (2, 1, 1, 1)
    kernel_size: int = Field(3, gt=0)
    lr: float = Field(1e-3, gt=0)
    pretrain_steps: int = Field(2000, ge=0)  # I_p
    finetune_steps: int = Field(500, ge=0)   # I_f
    shift_pad: int = Field(4, ge=0)
    temperature: float = 0.1                 # tau
    intrinsic_weight: float = 1.5            # w
    intrinsic_coef: float = Field(5e-3, ge=0)  # alpha
    ema_momentum: float = Field(0.05, gt=0, le=1)  # eta
    sinkhorn_epsilon: float = Field(0.05, gt=0)
    sinkhorn_iterations: int = Field(3, ge=1)
    renormalize_targets: bool = True
    coverage_interval: int = Field(100, ge=0)
    coverage_k: int = Field(3, gt=0)

    @field_validator("temperature")
    @classmethod
    def _temperature_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("temperature must be positive")
        return v

    @field_validator("intrinsic_weight")
    @classmethod
    def _weight_above_one(cls, v: float) -> float:
        if v <= 1:
            raise ValueError("intrinsic weight must exceed 1")
        return v

    @model_validator(mode="after")
    def _conv_layout(self) -> SslConfig:
        if not self.conv_channels:
            raise ValueError("conv_channels must name at least one layer")
        if len(self.conv_channels) != len(self.conv_strides):
            raise ValueError("conv_channels and conv_strides must have the same length")
        return self


class RlConfig(_Section):
    discount: float = 0.99                   # gamma
    replay_capacity: int = Field(40_000, gt=0)
    batch_size: int = Field(128, gt=0)
    init_temperature: float = Field(0.1, gt=0)
    actor_lr: float = Field(3e-4, gt=0)
    critic_lr: float = Field(3e-4, gt=0)
    temperature_lr: float = Field(3e-4, gt=0)
    actor_update_freq: int = Field(2, gt=0)
    critic_target_freq: int = Field(2, gt=0)
    critic_target_momentum: float = Field(0.01, gt=0, le=1)
    total_steps: int = Field(30_000, ge=0)   # I_d
    seed_steps: int = Field(1000, ge=0)
    beta: float = Field(0.2, ge=0)
    knn_k: int = Field(3, gt=0)
    q_capacity: int = Field(2048, gt=0)
    feature_dim: int = Field(50, gt=0)
    hidden_dim: int = Field(64, gt=0)
    log_std_min: float = -10.0
    log_std_max: float = 2.0
    eval_interval: int = Field(5000, gt=0)
    eval_episodes: int = Field(10, ge=1)

    @field_validator("discount")
    @classmethod
    def _discount_open_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError("discount must lie in (0, 1)")
        return v

    @model_validator(mode="after")
    def _log_std_order(self) -> RlConfig:
        if self.log_std_min >= self.log_std_max:
            raise ValueError("log_std_min must be below log_std_max")
        return self


class RunConfig(_Section):
    preset: Literal["desk", "paper"] = "desk"
    seed: int = 0
    precision: Literal["float32", "float64"] = "float32"
    domains: list[str] = ["pendulum", "point_mass"]
    downstream_domains: list[str] = ["pendulum", "point_mass"]
    finetune_domain: str | None = None
    phases: list[str] = ["collect", "pretrain", "train", "metrics"]
    env: EnvConfig = EnvConfig()
    collect: CollectConfig = CollectConfig()
    ssl: SslConfig = SslConfig()
    rl: RlConfig = RlConfig()

    @field_validator("phases")
    @classmethod
    def _known_phases(cls, v: list[str]) -> list[str]:
        unknown = [p for p in v if p not in PHASES]
        if unknown:
            raise ValueError(f"unknown phases {unknown}; choose from {list(PHASES)}")
        return v

    @model_validator(mode="after")
    def _cross_section(self) -> RunConfig:
        problems = []
        if self.collect.steps > self.collect.capacity:
            problems.append("collect.steps must not exceed collect.capacity")
        if self.ssl.shift_pad >= self.env.render_size:
            problems.append("ssl.shift_pad must be smaller than env.render_size")
        if self.env.episode_length < self.env.action_repeat:
            problems.append("env.episode_length must cover at least one action repeat")
        if "pretrain" in self.phases and not self.domains:
            problems.append("domains must name at least one domain")
        if "finetune" in self.phases and self.finetune_domain is None:
            problems.append("the finetune phase needs finetune_domain")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    @property
    def dtype(self) -> type:
        return np.float64 if self.precision == "float64" else np.float32


# --- presets ----------------------------------------------------------------

PRESETS: dict[str, dict[str, Any]] = {
    "desk": {},
    "paper": {
        "env.render_size": 84,
        "env.rgb": True,
        "env.episode_length": 1000,
        "collect.capacity": 100_000,
        "collect.steps": 100_000,
        "ssl.prototypes": 512,
        "ssl.latent_dim": 128,
        "ssl.batch_size": 512,
        "ssl.predictor_hidden": 1024,
        "ssl.lr": 1e-4,
        "ssl.pretrain_steps": 50_000,
        "rl.batch_size": 512,
        "rl.actor_lr": 1e-4,
        "rl.critic_lr": 1e-4,
        "rl.temperature_lr": 1e-4,
        "rl.total_steps": 500_000,
        "rl.hidden_dim": 1024,
    },
}


# --- flat text codec --------------------------------------------------------

def _field_kinds() -> dict[str, Any]:
    """Map every accepted key to its pydantic field info."""
    kinds: dict[str, Any] = {}
    for name, info in RunConfig.model_fields.items():
        if name in SECTIONS:
            section_cls = info.annotation
            for sub, sub_info in section_cls.model_fields.items():
                kinds[f"{name}.{sub}"] = sub_info
        else:
            kinds[name] = info
    return kinds


def _is_sequence(info: Any) -> bool:
    origin = getattr(info.annotation, "__origin__", None)
    return origin in (list, tuple)


def _parse_value(raw: str, info: Any) -> Any:
    value = yaml.safe_load(raw) if raw else None
    if _is_sequence(info) and value is None:
        return []
    if _is_sequence(info) and isinstance(value, str | int | float):
        value = [part.strip() for part in str(value).split(",") if part.strip()]
    return value


def parse_config_text(text: str) -> tuple[dict[str, Any], list[str]]:
    """Read flat text into ``{key: value}``; returns (values, errors)."""
    kinds = _field_kinds()
    values: dict[str, Any] = {}
    errors: list[str] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            errors.append(f"line {lineno}: expected 'key = value', got {stripped!r}")
            continue
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in kinds:
            errors.append(f"{key}: unknown key")
            continue
        if key in values:
            errors.append(f"{key}: duplicate key (line {lineno})")
            continue
        try:
            values[key] = _parse_value(raw, kinds[key])
        except yaml.YAMLError as e:
            errors.append(f"{key}: cannot parse value {raw!r} ({e})")
    return values, errors


def _nest(flat: dict[str, Any]) -> dict[str, Any]:
    nested: dict[str, Any] = {}
    for key, value in flat.items():
        if "." in key:
            section, field = key.split(".", 1)
            nested.setdefault(section, {})[field] = value
        else:
            nested[key] = value
    return nested


def _format_pydantic_errors(exc: ValidationError) -> list[str]:
    messages = []
    for err in exc.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "config"
        msg = err["msg"].removeprefix("Value error, ")
        messages.append(f"{loc}: {msg}")
    return messages


def build_config(values: dict[str, Any]) -> RunConfig:
    """Apply the chosen preset, then explicit values, and validate everything at once."""
    preset = values.get("preset", "desk")
    problems = []
    if not isinstance(preset, str) or preset not in PRESETS:
        problems.append(f"preset: unknown preset {preset!r}; choose desk or paper")
        values = {k: v for k, v in values.items() if k != "preset"}
        preset = "desk"
    merged = {**PRESETS[preset], **values}
    try:
        config = RunConfig.model_validate(_nest(merged))
    except ValidationError as e:
        raise ConfigInvalidError(problems + _format_pydantic_errors(e)) from e
    if problems:
        raise ConfigInvalidError(problems)
    return config


def check_config(text: str) -> list[str]:
    """Validate flat config text.

    Returns a list of validation errors (empty = valid).
    """
    values, errors = parse_config_text(text)
    if errors:
        return errors
    try:
        build_config(values)
    except ConfigInvalidError as e:
        return list(e.errors)
    return []


def validate_config(text: str) -> RunConfig:
    """Parse and validate flat config text; raises ConfigInvalidError with every problem."""
    values, errors = parse_config_text(text)
    try:
        config = build_config(values)
    except ConfigInvalidError as e:
        raise ConfigInvalidError(errors + list(e.errors)) from e
    if errors:
        raise ConfigInvalidError(errors)
    return config


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, list | tuple):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(config: RunConfig) -> str:
    """Every field, canonical order; ``validate_config`` reads it back to an equal config."""
    lines = []
    for name in RunConfig.model_fields:
        if name in SECTIONS:
            continue
        lines.append(f"{name} = {_format_value(getattr(config, name))}")
    for section in SECTIONS:
        lines.append("")
        sub = getattr(config, section)
        for field in type(sub).model_fields:
            lines.append(f"{section}.{field} = {_format_value(getattr(sub, field))}")
    return "\n".join(lines) + "\n"


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode("utf-8")).hexdigest()


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` gives the default desk config."""
    if path is None:
        return validate_config("")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise StorageIOError(f"cannot read config {path}: {e}") from e
    logger.debug("Loaded config from %s", path)
    return validate_config(text)


def with_overrides(config: RunConfig, **flat: Any) -> RunConfig:
    """Copy of ``config`` with ``section.field``-style overrides (``ssl__lr=...``)."""
    text = serialize_config(config)
    values, _ = parse_config_text(text)
    for key, value in flat.items():
        if value is not None:
            values[key.replace("__", ".")] = value
    return build_config(values)


class Settings(BaseSettings):
    """Process-level settings from ``PROTOLAB_*`` environment variables.

    These only pick output locations and verbosity; they never change results.
    """

    model_config = SettingsConfigDict(env_prefix="PROTOLAB_")

    run_root: Path = Path("runs")
    log_level: str = "INFO"
    run_slow: bool = False


def get_settings() -> Settings:
    return Settings()
