"""Main CLI entry point for rootcloak."""

import typer
from rich.table import Table

from rootcloak.cli.commands import build, check, epsilon_max, field, obstruction, trace, verify
from rootcloak.cli.terminal import application
from rootcloak.console import console

app = typer.Typer(
    help="rootcloak - Riemannian metrics on R^n that are invisible along the roots of A_n",
    add_completion=False,
)

# Subcommands
app.add_typer(build.app, name="build", help="Resolve the configuration and report the construction")
app.add_typer(field.app, name="field", help="Export H, its eigenvalues and ball membership on a grid")
app.add_typer(trace.app, name="trace", help="Trace geodesics for a direction and export them")
app.add_typer(verify.app, name="verify", help="Run the verification suites")
app.add_typer(obstruction.app, name="obstruction", help="Scan the flatness obstruction")
app.add_typer(epsilon_max.app, name="epsilon-max", help="Find the largest admissible epsilon")
app.add_typer(check.app, name="check", help="Show or diagnose the rootcloak configuration")


def get_version() -> str:
    from importlib.metadata import version

    try:
        return version("rootcloak")
    except:  # noqa: E722
        return "unknown"


def show_welcome() -> None:
    """Show a welcome message with available commands."""
    console.print(f"\nrootcloak {get_version()}")

    table = Table(title="\nAvailable Commands")
    table.add_column("Command", style="green")
    table.add_column("Description")

    table.add_row("[bold]verify[/bold]", "Run invisibility, symmetry, energy, flatness and geometry suites")
    table.add_row("build", "Resolve the configuration and report the construction")
    table.add_row("field", "Export H on a grid as CSV")
    table.add_row("trace", "Trace geodesics and export polylines")
    table.add_row("obstruction", "Scan the flatness obstruction as CSV")
    table.add_row("epsilon-max", "Find the largest admissible epsilon")
    table.add_row("check", "Show or diagnose the configuration")

    console.print(table)
    console.print("\n[italic]get started with:[/italic] [bold][cyan]rootcloak[/cyan][/bold] [green]verify --suite all[/green]")


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose mode"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Disable output"),
    version: bool = typer.Option(False, "--version", help="Show version and exit"),
) -> None:
    """rootcloak CLI - construct and verify metrics with invisible directions.

    Use --help with any command for detailed usage information.
    """
    application.set_verbosity(1 if verbose else -1 if quiet else 0)

    if version:
        console.print(f"rootcloak v{get_version()}")
        raise typer.Exit()

    if ctx.invoked_subcommand is None:
        show_welcome()
