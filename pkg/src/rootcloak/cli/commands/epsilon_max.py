"""Bisection for the largest admissible epsilon."""

from pathlib import Path
from typing import List, Optional

import typer

from rootcloak.cli.common import CONFIG_HELP, OUTPUT_HELP, SET_HELP, command_run, construct, fail, load_settings, write_text
from rootcloak.core.exceptions import RootCloakError
from rootcloak.geometry.metricfield import max_admissible_epsilon
from rootcloak.verify.report import to_json

app = typer.Typer(help="Find the largest admissible epsilon for the bump data")


@app.callback(invoke_without_command=True)
def epsilon_max(
    grid: Optional[int] = typer.Option(None, "--grid", "-g", min=2, help="Grid points per axis (default: epsilon_search.grid_resolution)"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """
    Report the conservative threshold (bisection result times the safety factor)
    and the epsilon "auto" would pick. The configured epsilon is ignored.
    """
    settings = load_settings(config, overrides)
    settings = settings.model_copy(update={"epsilon": 0.0})
    with command_run("epsilon-max", settings):
        construction = construct(settings)
        search = settings.epsilon_search
        resolution = grid or search.grid_resolution
        try:
            threshold = max_admissible_epsilon(
                construction.roots,
                construction.bumps,
                grid_resolution=resolution,
                lower=search.lower,
                upper=search.upper,
                iterations=search.iterations,
                min_eigenvalue=search.min_eigenvalue,
                safety=search.safety,
            )
        except RootCloakError as e:
            fail(e)
        result = {
            "epsilon_max": threshold,
            "epsilon_auto": 0.5 * threshold,
            "grid_resolution": resolution,
            "min_eigenvalue": search.min_eigenvalue,
            "safety": search.safety,
            "ball_radius": construction.report.ball_radius,
            "max_grad_phi": construction.report.max_grad_phi,
            "max_hess_phi": construction.report.max_hess_phi,
            "amplitudes": construction.report.amplitudes,
            "config_digest": construction.digest,
        }
        write_text(to_json(result), output)
