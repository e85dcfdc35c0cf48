"""protolab collect -- fill one domain buffer with random-policy frames."""

from pathlib import Path

import typer

from protolab.cli.common import ConfigOption, SeedOption, cli_errors, console, resolve_config


def collect_cmd(
    domain: str = typer.Option(..., "--domain", "-d", help="Registered domain name"),
    out: Path = typer.Option(..., "--out", "-o", help="Buffer file to write"),
    config_path: Path = ConfigOption,
    seed: int = SeedOption,
    steps: int = typer.Option(None, "--steps", help="Override collect.steps"),
):
    """Collect frames from uniform-random actions and save them."""
    from protolab.collect import collect_random, save_buffer
    from protolab.seeding import derive_seed

    with cli_errors():
        config = resolve_config(config_path, seed=seed, collect__steps=steps)
        with console.status(f"Collecting {config.collect.steps} frames from {domain}..."):
            buffer = collect_random(
                domain, config.collect.steps,
                derive_seed(derive_seed(config.seed, "collect"), domain),
                env=config.env, capacity=config.collect.capacity,
                record_states=config.collect.record_states,
            )
        save_buffer(buffer, out)
    console.print(
        f"[green]{domain}: {len(buffer)} frames, {len(buffer.episode_starts)} episodes "
        f"-> {out}[/green]"
    )
