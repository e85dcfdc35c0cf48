"""protolab pretrain / finetune / train -- the three learning stages on explicit files."""

from pathlib import Path

import typer
from rich.table import Table

from protolab.cli.common import ConfigOption, SeedOption, cli_errors, console, resolve_config


def pretrain_cmd(
    buffers: list[Path] = typer.Option(
        ..., "--buffers", "-b", help="Buffer file (repeat once per domain)",
    ),
    out: Path = typer.Option(..., "--out", "-o", help="Encoder checkpoint to write"),
    log: Path = typer.Option(None, "--log", help="Per-step CSV log"),
    config_path: Path = ConfigOption,
    seed: int = SeedOption,
    steps: int = typer.Option(None, "--steps", help="Override ssl.pretrain_steps"),
):
    """Pre-train encoder and prototypes across the given buffers."""
    from protolab.collect import load_buffer
    from protolab.protolearn import pretrain, save_encoder, write_pretrain_log
    from protolab.seeding import derive_seed

    with cli_errors():
        config = resolve_config(config_path, seed=seed, ssl__pretrain_steps=steps)
        loaded = [load_buffer(p) for p in buffers]
        result = pretrain(
            loaded, config.ssl, derive_seed(config.seed, "ssl"),
            frame_stack=config.env.frame_stack, dtype=config.dtype,
        )
        save_encoder(out, result.stack, result.bank, {"domains": [b.domain for b in loaded]})
        if log is not None:
            write_pretrain_log(result.log, log)
    last = result.log[-1] if result.log else None
    summary = f", final L_SSL {last.l_ssl:.4f}" if last else ""
    console.print(f"[green]{len(result.log)} updates{summary} -> {out}[/green]")


def finetune_cmd(
    encoder: Path = typer.Option(..., "--encoder", "-e", help="Pre-trained encoder checkpoint"),
    buffer: Path = typer.Option(..., "--buffer", "-b", help="Buffer of the target domain"),
    out: Path = typer.Option(..., "--out", "-o", help="Finetuned checkpoint to write"),
    log: Path = typer.Option(None, "--log", help="Per-step CSV log"),
    config_path: Path = ConfigOption,
    seed: int = SeedOption,
):
    """Continue the pre-training rule on a single domain's buffer."""
    from protolab.collect import load_buffer
    from protolab.protolearn import finetune, load_encoder, save_encoder, write_pretrain_log
    from protolab.seeding import derive_seed

    with cli_errors():
        config = resolve_config(config_path, seed=seed)
        stack, bank = load_encoder(encoder)
        buf = load_buffer(buffer)
        result = finetune(
            stack, bank, buf, config.ssl, derive_seed(config.seed, "finetune"),
            frame_stack=config.env.frame_stack,
        )
        save_encoder(out, result.stack, result.bank, {"finetune_domain": buf.domain})
        if log is not None:
            write_pretrain_log(result.log, log)
    console.print(f"[green]{buf.domain}: {len(result.log)} finetuning updates -> {out}[/green]")


def train_cmd(
    domain: str = typer.Option(..., "--domain", "-d", help="Downstream domain"),
    encoder: Path = typer.Option(..., "--encoder", "-e", help="Frozen encoder checkpoint"),
    out_dir: Path = typer.Option(
        None, "--out-dir", "-o",
        help="Directory for log and agent [default: <run dir>/downstream/<domain>]",
    ),
    config_path: Path = ConfigOption,
    seed: int = SeedOption,
    steps: int = typer.Option(None, "--steps", help="Override rl.total_steps"),
    beta: float = typer.Option(None, "--beta", help="Override rl.beta"),
    baseline: bool = typer.Option(False, "--baseline", help="Also evaluate a random policy"),
):
    """Train SAC on the frozen encoder with prototype-guided exploration."""
    from protolab.pipeline import run_directory
    from protolab.protolearn import load_encoder
    from protolab.rlagent import (
        evaluate_random_policy,
        save_agent,
        train_downstream,
        write_eval_log,
    )
    from protolab.seeding import derive_seed

    with cli_errors():
        config = resolve_config(config_path, seed=seed, rl__total_steps=steps, rl__beta=beta)
        if out_dir is None:
            out_dir = run_directory(config) / "downstream" / domain
        stack, bank = load_encoder(encoder)
        rl_seed = derive_seed(derive_seed(config.seed, "rl"), domain)
        result = train_downstream(domain, stack, bank, config, rl_seed)
        write_eval_log(result.log, out_dir / "eval_log.csv")
        save_agent(out_dir / "agent.ckpt", result.agent, {"domain": domain})
        rows = [(str(rec.env_step), rec) for rec in result.log]
        if baseline:
            random_record = evaluate_random_policy(
                domain, config.env, episodes=config.rl.eval_episodes,
                seed=derive_seed(derive_seed(config.seed, "eval"), domain),
            )
            write_eval_log([random_record], out_dir / "random_baseline.csv")
            rows.append(("random", random_record))

    table = Table(title=f"{domain} evaluation")
    table.add_column("Step", justify="right")
    table.add_column("Mean return", justify="right")
    table.add_column("Std", justify="right")
    for label, rec in rows:
        table.add_row(label, f"{rec.mean_return:.2f}", f"{rec.std_return:.2f}")
    console.print(table)
    console.print(f"[green]-> {out_dir}[/green]")
