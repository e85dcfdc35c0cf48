"""protolab config -- print the effective config or check a config file."""

from pathlib import Path

import typer

from protolab.cli.common import EXIT_CONFIG, cli_errors, console, err_console

app = typer.Typer(no_args_is_help=True)


@app.command(name="show")
def show_cmd(
    config_path: Path = typer.Option(None, "--config", "-c", help="Config file (default: desk)"),
    preset: str = typer.Option(None, "--preset", help="Show a preset's defaults"),
):
    """Print every field of the effective config, canonical order."""
    from protolab.cli.common import resolve_config
    from protolab.config import config_hash, serialize_config, validate_config

    with cli_errors():
        if preset is not None:
            config = validate_config(f"preset = {preset}\n")
        else:
            config = resolve_config(config_path)
    typer.echo(serialize_config(config), nl=False)
    console.print(f"# hash {config_hash(config)[:12]}", style="dim")


@app.command(name="validate")
def validate_cmd(
    path: Path = typer.Argument(..., help="Config file to check"),
):
    """Report every problem in a config file; exit 1 if there are any."""
    from protolab.config import check_config

    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        err_console.print(f"[red]cannot read {path}: {e}[/red]")
        raise typer.Exit(code=EXIT_CONFIG) from e
    errors = check_config(text)
    if errors:
        for msg in errors:
            err_console.print(f"[red]config:[/red] {msg}")
        raise typer.Exit(code=EXIT_CONFIG)
    console.print(f"[green]{path}: valid[/green]")
