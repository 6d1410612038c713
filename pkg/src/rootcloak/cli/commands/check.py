"""Command to check the rootcloak configuration."""

import platform
import sys
from importlib.metadata import version
from math import factorial
from pathlib import Path
from typing import List, Optional

import typer
import yaml
from rich.panel import Panel
from rich.table import Table

from rootcloak.cli.common import CONFIG_HELP, SET_HELP, fail
from rootcloak.config import Settings, get_settings
from rootcloak.console import console
from rootcloak.core.construction import config_digest
from rootcloak.core.exceptions import ConfigInvalid

app = typer.Typer(
    help="Show or diagnose the rootcloak configuration",
    no_args_is_help=False,
)


def get_rootcloak_version() -> str:
    try:
        return version("rootcloak")
    except:  # noqa: E722
        return "unknown"


def describe_settings(settings: Settings) -> Table:
    table = Table(show_header=False, box=None)
    table.add_column("Setting", style="cyan")
    table.add_column("Value")
    table.add_row("Dimension n", str(settings.n))
    table.add_row("Roots N", str(settings.root_count))
    table.add_row("Balls (n+1)!", str(factorial(settings.n + 1)))
    table.add_row("Epsilon", str(settings.epsilon))
    table.add_row("Ball radius", f"{settings.ball_radius} (fraction {settings.radius_fraction})" if settings.ball_radius == "auto" else str(settings.ball_radius))
    table.add_row("Chamber point", str(settings.chamber_point))
    amplitudes = settings.amplitudes
    if amplitudes.values is not None:
        table.add_row("Amplitudes", ", ".join(f"{a:g}" for a in amplitudes.values))
    else:
        table.add_row("Amplitudes", f"seed {amplitudes.seed}, uniform in [{amplitudes.low:g}, {amplitudes.high:g}]")
    table.add_row("Integrator", f"{settings.integrator.method}, rtol {settings.integrator.rel_tol:g}, atol {settings.integrator.abs_tol:g}")
    table.add_row("Rays per direction", str(settings.verification.rays))
    table.add_row("Logger", f"{settings.logger.type} ({settings.logger.level})")
    table.add_row("Config digest", config_digest(settings)[:16])
    return table


def show_check_summary(config: Optional[Path], overrides: Optional[List[str]]) -> None:
    """Show system information, the config file found and the settings it yields."""
    system_table = Table(show_header=False, box=None)
    system_table.add_column("Key", style="cyan")
    system_table.add_column("Value")
    system_table.add_row("rootcloak Version", get_rootcloak_version())
    system_table.add_row("Platform", platform.system())
    system_table.add_row("Python Version", ".".join(sys.version.split(".")[:3]))
    system_table.add_row("Python Path", sys.executable)
    console.print(Panel(system_table, title="System Information", border_style="blue"))

    config_path = config or Settings.find_config()
    files_table = Table(show_header=False, box=None)
    files_table.add_column("Setting", style="cyan")
    files_table.add_column("Value")
    if config_path is None:
        files_table.add_row("Config File", "[yellow]Not found[/yellow] (using defaults and environment)")
    else:
        files_table.add_row("Config File", f"[green]Found[/green] ({config_path})")
    console.print(Panel(files_table, title="Configuration Files", border_style="blue"))

    try:
        settings = get_settings(config_path, overrides)
    except ConfigInvalid as e:
        fail(e)
    console.print(Panel(describe_settings(settings), title="Settings", border_style="blue"))


@app.command()
def show(
    path: Optional[Path] = typer.Argument(None, help="Path to configuration file to display"),
) -> None:
    """Display the configuration file content or search for it."""
    config_path = path.resolve() if path else Settings.find_config()
    if config_path is None:
        console.print("[yellow]No config file found in current directory or parents[/yellow]")
        raise typer.Exit(1)
    if not config_path.exists():
        console.print(f"[red]Error:[/red] Config file not found at {config_path}")
        raise typer.Exit(1)

    console.print(f"\n[bold]Config file:[/bold] {config_path}\n")
    content = config_path.read_text(encoding="utf-8")
    try:
        parsed = yaml.safe_load(content)
    except yaml.YAMLError as e:
        console.print(f"[red]Error parsing config file:[/red] {e}")
        raise typer.Exit(2)
    if parsed is None:
        console.print("[yellow]Warning: File is empty or contains only comments[/yellow]\n")
    else:
        console.print(f"[green]Successfully parsed {len(parsed) if isinstance(parsed, dict) else 0} root keys[/green]\n")
    console.print(content)


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
) -> None:
    """Check and diagnose the rootcloak configuration."""
    if ctx.invoked_subcommand is None:
        show_check_summary(config, overrides)
