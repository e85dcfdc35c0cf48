"""CLI entry point."""

import typer

from protolab.cli.common import setup_logging
from protolab.config import get_settings

app = typer.Typer(
    name="protolab",
    help="protolab: cross-domain prototypical pre-training for pixel-based control",
    no_args_is_help=True,
)


@app.callback()
def main(
    log_level: str = typer.Option(
        None, "--log-level", help="Logging level (default from PROTOLAB_LOG_LEVEL)",
    ),
):
    setup_logging(log_level or get_settings().log_level)


def _register_lazy():
    """Register subcommands that have heavier imports."""
    from protolab.cli.collect_cmd import collect_cmd
    from protolab.cli.config_cmd import app as config_app
    from protolab.cli.metrics_cmd import app as metrics_app
    from protolab.cli.pipeline_cmd import pipeline_cmd
    from protolab.cli.train_cmd import finetune_cmd, pretrain_cmd, train_cmd

    app.command(name="collect", help="Collect a random-policy frame buffer")(collect_cmd)
    app.command(name="pretrain", help="Cross-domain prototypical pre-training")(pretrain_cmd)
    app.command(name="finetune", help="Finetune an encoder on one domain")(finetune_cmd)
    app.command(name="train", help="Downstream SAC on a frozen encoder")(train_cmd)
    app.command(name="pipeline", help="Run all configured phases")(pipeline_cmd)
    app.add_typer(metrics_app, name="metrics", help="Coverage, PCA and linear-probe diagnostics")
    app.add_typer(config_app, name="config", help="Show or validate run configs")


_register_lazy()


if __name__ == "__main__":
    app()
