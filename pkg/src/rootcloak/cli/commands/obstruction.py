"""Grid scan of the flatness obstruction."""

from pathlib import Path
from typing import List, Optional

import typer

from rootcloak.cli.common import CONFIG_HELP, OUTPUT_HELP, SET_HELP, command_run, construct, csv_text, load_settings, write_text
from rootcloak.verify.obstruction import obstruction_grid, obstruction_values, scan_obstruction
from rootcloak.verify.report import to_json

app = typer.Typer(help="Scan the flatness obstruction over the base ball")


@app.callback(invoke_without_command=True)
def obstruction(
    grid: Optional[int] = typer.Option(None, "--grid", "-g", min=2, help="Points per axis (default: verification.obstruction_grid)"),
    summary: Optional[Path] = typer.Option(None, "--summary", help="Also write the per-pair maxima as JSON"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """CSV with x_1..x_n (base-ball frame) and one column obs_k_l per pair k < l."""
    settings = load_settings(config, overrides)
    with command_run("obstruction", settings):
        construction = construct(settings)
        hf = construction.field
        resolution = grid or settings.verification.obstruction_grid
        points = obstruction_grid(hf, resolution)
        pairs, values = obstruction_values(hf, points)
        header = [f"x_{i + 1}" for i in range(hf.n)] + [f"obs_{k + 1}_{l + 1}" for k, l in pairs]
        rows = ([*map(float, x), *map(float, v)] for x, v in zip(points, values))
        write_text(csv_text(header, rows), output)
        if summary is not None:
            write_text(to_json(scan_obstruction(hf, resolution, settings.thresholds.obstruction)), summary)
