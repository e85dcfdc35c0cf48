"""protolab metrics -- coverage, PCA and linear-probe diagnostics for a saved encoder."""

from pathlib import Path

import typer
from rich.table import Table

from protolab.cli.common import ConfigOption, cli_errors, console, resolve_config

app = typer.Typer(no_args_is_help=True)


@app.command(name="coverage")
def coverage_cmd(
    encoder: Path = typer.Option(..., "--ckpt", help="Encoder checkpoint"),
    k: int = typer.Option(3, "--k", help="Neighbour rank for KNE"),
    out: Path = typer.Option(
        None, "--out", "-o", help="CSV file to write [default: <run dir>/metrics/coverage.csv]",
    ),
    config_path: Path = ConfigOption,
):
    """Average and k-th nearest-neighbour distances between prototypes."""
    from protolab.metrics import coverage, write_coverage_csv
    from protolab.pipeline import run_directory
    from protolab.protolearn import load_encoder

    with cli_errors():
        config = resolve_config(config_path)
        _, bank = load_encoder(encoder)
        report = coverage(bank, k)
        if out is None:
            out = run_directory(config) / "metrics" / "coverage.csv"
        write_coverage_csv(report, out, encoder.stem)
    console.print(
        f"[bold]ANE[/bold] {report.ane:.4f}   [bold]KNE (k={k})[/bold] {report.kne:.4f} -> {out}"
    )


@app.command(name="pca")
def pca_cmd(
    encoder: Path = typer.Option(..., "--ckpt", help="Encoder checkpoint"),
    buffers: list[Path] = typer.Option(..., "--buffers", "-b", help="Buffer file (repeatable)"),
    components: int = typer.Option(4, "--components", "-n"),
    per_domain: int = typer.Option(500, "--per-domain", help="Frames sampled per buffer"),
    out: Path = typer.Option(..., "--out", "-o", help="CSV file to write"),
    config_path: Path = ConfigOption,
):
    """Joint principal components of the encoder's features across buffers."""
    from protolab.collect import load_buffer
    from protolab.metrics import pca_buffers, write_pca_csv
    from protolab.protolearn import load_encoder

    with cli_errors():
        config = resolve_config(config_path)
        stack, _ = load_encoder(encoder)
        result = pca_buffers(
            [load_buffer(p) for p in buffers], stack, components,
            per_domain=per_domain, frame_stack=config.env.frame_stack, seed=config.seed,
        )
        write_pca_csv(result, out)
    ratios = ", ".join(f"{r:.3f}" for r in result.ratios)
    console.print(f"explained variance ratios: {ratios} -> {out}")


@app.command(name="probe")
def probe_cmd(
    encoder: Path = typer.Option(..., "--ckpt", help="Encoder checkpoint"),
    buffers: list[Path] = typer.Option(
        ..., "--buffers", "-b", help="Buffer file with recorded states (repeatable)",
    ),
    ridge: float = typer.Option(1e-3, "--ridge"),
    out: Path = typer.Option(None, "--out", "-o", help="CSV file to write"),
    config_path: Path = ConfigOption,
):
    """Held-out MSE of a ridge regression from features to physical state."""
    from protolab.collect import load_buffer
    from protolab.metrics import linear_probe, write_probe_csv
    from protolab.protolearn import load_encoder

    with cli_errors():
        config = resolve_config(config_path)
        stack, _ = load_encoder(encoder)
        results = [
            linear_probe(
                load_buffer(p), stack, ridge=ridge, seed=config.seed,
                frame_stack=config.env.frame_stack,
            )
            for p in buffers
        ]
        if out is not None:
            write_probe_csv(results, out, encoder.stem)

    table = Table(title="Linear probe")
    table.add_column("Domain", style="cyan")
    table.add_column("MSE", justify="right")
    table.add_column("Train/Test", justify="right")
    for r in results:
        table.add_row(r.domain, f"{r.mse:.5f}", f"{r.n_train}/{r.n_test}")
    console.print(table)
