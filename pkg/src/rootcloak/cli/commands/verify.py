"""Run the verification suites."""

from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table

from rootcloak.cli.common import (
    CONFIG_HELP,
    EXIT_FAILED,
    EXIT_PASS,
    OUTPUT_HELP,
    SET_HELP,
    command_run,
    construct,
    fail,
    load_settings,
    write_text,
)
from rootcloak.console import status_console
from rootcloak.core.exceptions import ConfigInvalid, RootCloakError
from rootcloak.verify.report import VerificationReport, to_json
from rootcloak.verify.runner import run_verification

app = typer.Typer(help="Run the verification suites")


def show_summary(report: VerificationReport) -> None:
    table = Table(title="Verification")
    table.add_column("Suite", style="cyan")
    table.add_column("Result")
    for suite, passed in report.summary().items():
        table.add_row(suite, "[green]pass[/green]" if passed else "[red]FAIL[/red]")
    for inv in report.invisibility or []:
        status = "[green]pass[/green]" if inv.passed else "[red]FAIL[/red]"
        table.add_row(f"  {inv.label}", f"{status}  lateral {inv.max_lateral:.3e}  angular {inv.max_angular:.3e}  hits {inv.hits}/{inv.rays}")
    status_console.print(table)


@app.callback(invoke_without_command=True)
def verify(
    suites: Optional[List[str]] = typer.Option(
        None, "--suite", "-s", help="invisibility | symmetry | energy | flatness | geometry | all (repeatable, default all)"
    ),
    direction: Optional[str] = typer.Option(None, "--direction", "-d", help="Only this direction: root:i, root:-i or custom:c_1,...,c_n"),
    rays: Optional[int] = typer.Option(None, "--rays", min=1, help="Rays per direction (default: verification.rays)"),
    records: bool = typer.Option(False, "--records/--no-records", help="Include per-ray records in the report"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """
    Write the JSON verification report. Exits 0 when every assertion passes,
    1 when any fails (including a numerical failure during a suite), 2 for an
    invalid configuration.
    """
    settings = load_settings(config, overrides)
    with command_run("verify", settings):
        construction = construct(settings)
        try:
            report = run_verification(construction, suites or ["all"], direction=direction, rays=rays)
        except ConfigInvalid as e:
            fail(e)
        except RootCloakError as e:
            fail(e, code=EXIT_FAILED)

        if not records:
            for inv in report.invisibility or []:
                inv.records = []
        write_text(to_json(report), output)
        show_summary(report)
    raise typer.Exit(EXIT_PASS if report.passed else EXIT_FAILED)
