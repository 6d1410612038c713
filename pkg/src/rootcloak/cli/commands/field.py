"""Export H on a grid as CSV."""

from pathlib import Path
from typing import List, Optional

import numpy as np
import typer

from rootcloak.cli.common import CONFIG_HELP, OUTPUT_HELP, SET_HELP, command_run, construct, csv_text, fail, load_settings, write_text
from rootcloak.core.exceptions import RootCloakError
from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.metricfield import HamiltonianField, evaluate, unknown_labels

app = typer.Typer(help="Export the Hamiltonian matrix field on a grid")


def field_grid(hf: HamiltonianField, points_per_axis: int, extent: float | None = None) -> np.ndarray:
    """points_per_axis^n points of the cube [-extent, extent]^n, first coordinate slowest."""
    extent = hf.obstacle_radius if extent is None else extent
    axis = np.linspace(-extent, extent, points_per_axis)
    return np.stack(np.meshgrid(*([axis] * hf.n), indexing="ij"), axis=-1).reshape(-1, hf.n)


def field_row(hf: HamiltonianField, x: np.ndarray) -> list:
    """x_1..x_n, the upper triangle of H, min eigenvalue, ball (1-based, -1 outside)."""
    sample = evaluate(hf, x, derivatives=False)
    upper = sample.H[np.triu_indices(hf.n)]
    ball = sample.ball + 1 if sample.ball >= 0 else -1
    return [*map(float, x), *map(float, upper), float(np.linalg.eigvalsh(sample.H)[0]), ball]


def field_header(n: int) -> List[str]:
    return [f"x_{i + 1}" for i in range(n)] + unknown_labels(n) + ["min_eig", "in_ball"]


@app.callback(invoke_without_command=True)
def field(
    grid: int = typer.Option(50, "--grid", "-g", min=2, help="Points per axis; the CSV has grid^n rows"),
    extent: Optional[float] = typer.Option(None, "--extent", help="Half-width of the cube (default: obstacle radius)"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """Write x_1..x_n, h_11, h_12, ..., h_nn, min_eig, in_ball for every grid point."""
    settings = load_settings(config, overrides)
    with command_run("field", settings):
        construction = construct(settings)
        hf = construction.field
        points = field_grid(hf, grid, extent)
        executor = BatchExecutor(settings.executor, label="field")
        try:
            rows = executor.map_strict(lambda x: field_row(hf, x), list(points))
        except RootCloakError as e:
            fail(e)
        write_text(csv_text(field_header(hf.n), rows), output)
