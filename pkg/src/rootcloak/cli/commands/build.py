"""Resolve the configuration and report the construction."""

from pathlib import Path
from typing import List, Optional

import typer

from rootcloak.cli.common import (
    CONFIG_HELP,
    EXIT_FAILED,
    EXIT_PASS,
    OUTPUT_HELP,
    SET_HELP,
    command_run,
    construct,
    load_settings,
    write_text,
)
from rootcloak.verify.report import to_json

app = typer.Typer(help="Resolve the configuration and report the construction")


@app.callback(invoke_without_command=True)
def build(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """
    Resolve every "auto" field and write the construction report as JSON:
    epsilon and its threshold, radius, centres, amplitudes, condition numbers,
    the ball-geometry checks and the config digest.

    Exits 1 if the ball layout fails the small-ball conditions.
    """
    settings = load_settings(config, overrides)
    with command_run("build", settings):
        construction = construct(settings)
        write_text(to_json(construction.report), output)
    raise typer.Exit(EXIT_PASS if construction.report.geometry.passed else EXIT_FAILED)
