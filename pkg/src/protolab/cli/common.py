"""Shared CLI plumbing: logging setup, config loading, error-to-exit-code mapping."""

from __future__ import annotations

import logging
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler

from protolab.config import RunConfig, load_config, with_overrides
from protolab.exceptions import ConfigInvalidError, PhaseError, ProtolabError

console = Console()
err_console = Console(stderr=True)

EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def setup_logging(level: str) -> None:
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, rich_tracebacks=True, show_path=False)],
        force=True,
    )


@contextmanager
def cli_errors() -> Iterator[None]:
    """Config problems exit 1 with every message; any other failure exits 2."""
    try:
        yield
    except ConfigInvalidError as e:
        for msg in e.errors:
            err_console.print(f"[red]config:[/red] {msg}")
        raise typer.Exit(code=EXIT_CONFIG) from e
    except PhaseError as e:
        err_console.print(f"[red]{e.phase} failed:[/red] {type(e.cause).__name__}: {e.cause}")
        raise typer.Exit(code=EXIT_RUNTIME) from e
    except ProtolabError as e:
        err_console.print(f"[red]{type(e).__name__}:[/red] {e}")
        raise typer.Exit(code=EXIT_RUNTIME) from e
    except (typer.Exit, typer.Abort):
        raise
    except Exception as e:
        err_console.print(f"[red]{type(e).__name__}:[/red] {e}")
        raise typer.Exit(code=EXIT_RUNTIME) from e


def resolve_config(path: Path | None, **overrides) -> RunConfig:
    """Config from ``path`` (desk defaults when None) with flag overrides applied."""
    config = load_config(path)
    if any(v is not None for v in overrides.values()):
        config = with_overrides(config, **overrides)
    return config


ConfigOption = typer.Option(None, "--config", "-c", help="Run config file (key = value lines)")
SeedOption = typer.Option(None, "--seed", help="Override the root seed")
