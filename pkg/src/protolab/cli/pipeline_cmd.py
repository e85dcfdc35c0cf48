"""protolab pipeline -- run every configured phase and write a manifest."""

from pathlib import Path

import typer
from rich.table import Table

from protolab.cli.common import ConfigOption, SeedOption, cli_errors, console, resolve_config


def pipeline_cmd(
    config_path: Path = ConfigOption,
    manifest: Path = typer.Option(None, "--manifest", help="Re-run the config of a manifest"),
    run_root: Path = typer.Option(None, "--run-root", help="Directory holding run folders"),
    seed: int = SeedOption,
):
    """Collect, pretrain, finetune, train and measure, as the config lists."""
    from protolab.pipeline import rerun_manifest, run_pipeline

    if manifest is not None and config_path is not None:
        console.print("[red]--config and --manifest are mutually exclusive[/red]")
        raise typer.Exit(code=1)

    with cli_errors():
        if manifest is not None:
            result = rerun_manifest(manifest, run_root=run_root)
        else:
            result = run_pipeline(resolve_config(config_path, seed=seed), run_root=run_root)

    table = Table(title=f"Run {result.run_dir.name}")
    table.add_column("Kind", style="bold")
    table.add_column("Path")
    table.add_column("sha256", style="dim")
    for art in result.manifest.artifacts:
        table.add_row(art.kind, art.path, art.sha256[:12])
    console.print(table)
    console.print(f"[bold green]Pipeline complete:[/bold green] {result.run_dir}")
