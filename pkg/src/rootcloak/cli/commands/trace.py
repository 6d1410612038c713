"""Trace geodesics for one direction and export them."""

from pathlib import Path
from typing import List, Optional

import numpy as np
import typer

from rootcloak.cli.common import CONFIG_HELP, OUTPUT_HELP, SET_HELP, command_run, construct, csv_text, fail, load_settings, write_text
from rootcloak.core.exceptions import ConfigInvalid, RootCloakError
from rootcloak.executor.executor import BatchExecutor
from rootcloak.geometry.geodesic import TraceResult
from rootcloak.verify.invisibility import TraceOptions, parse_direction, ray_offsets, trace_ray
from rootcloak.verify.report import to_json

app = typer.Typer(help="Trace geodesics through the obstacle")


def parse_offset(text: str, n: int) -> np.ndarray:
    try:
        offset = np.array([float(c) for c in text.split(",")])
    except ValueError:
        raise ConfigInvalid(f"Invalid offset '{text}'", "use --offset c_1,...,c_n", field="offset")
    if offset.shape != (n,):
        raise ConfigInvalid(f"Offset needs {n} components, got {offset.shape[0]}", field="offset")
    return offset


def trace_record(trace: TraceResult, offset: np.ndarray) -> dict:
    return {
        "offset": offset,
        "entry_line": {"point": trace.entry_line.point, "direction": trace.entry_line.direction},
        "exit_line": {"point": trace.exit_line.point, "direction": trace.exit_line.direction},
        "lateral": trace.lateral_deviation,
        "angular": trace.angular_deviation,
        "balls_crossed": [b + 1 for b in trace.balls_crossed],
        "energy_drift": trace.energy_drift,
        "time_delay": trace.time_delay,
        "steps": int(trace.t.size),
    }


def polyline_csv(trace: TraceResult) -> str:
    n = trace.xs.shape[1]
    header = ["t"] + [f"x_{i + 1}" for i in range(n)] + [f"p_{i + 1}" for i in range(n)]
    rows = ([float(t), *map(float, x), *map(float, p)] for t, x, p in zip(trace.t, trace.xs, trace.ps))
    return csv_text(header, rows)


@app.callback(invoke_without_command=True)
def trace(
    direction: str = typer.Option("root:1", "--direction", "-d", help="root:i, root:-i or custom:c_1,...,c_n"),
    offsets: Optional[List[str]] = typer.Option(None, "--offset", help="Launch offset c_1,...,c_n, projected orthogonally to the direction (repeatable)"),
    rays: int = typer.Option(5, "--rays", min=1, help="Grid of rays when no --offset is given"),
    polylines: Optional[Path] = typer.Option(None, "--polylines", help="Directory for one CSV polyline (t, x, p) per trace"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help=CONFIG_HELP),
    overrides: Optional[List[str]] = typer.Option(None, "--set", help=SET_HELP),
    output: Optional[Path] = typer.Option(None, "--output", "-o", help=OUTPUT_HELP),
) -> None:
    """One JSON record per trace: entry and exit lines, deviations, balls crossed, energy drift."""
    settings = load_settings(config, overrides)
    with command_run("trace", settings):
        construction = construct(settings)
        hf = construction.field
        try:
            d = parse_direction(direction, construction.roots)
            if offsets:
                starts = [parse_offset(o, hf.n) for o in offsets]
            else:
                starts = list(ray_offsets(d.vector, hf.obstacle_radius, rays))
            options = TraceOptions.for_field(hf, settings.integrator)
            executor = BatchExecutor(settings.executor, label=d.label)
            traces = executor.map_strict(lambda o: trace_ray(hf, d.vector, o, options), starts)
        except ConfigInvalid as e:
            fail(e)
        except RootCloakError as e:
            fail(e, suggestion="Lower epsilon or check the construction with 'rootcloak build'.")

        if polylines is not None:
            try:
                polylines.mkdir(parents=True, exist_ok=True)
                for index, t in enumerate(traces, start=1):
                    (polylines / f"trace_{index:04d}.csv").write_text(polyline_csv(t), encoding="utf-8")
            except OSError as e:
                fail(RootCloakError(f"Could not write polylines to {polylines}", str(e)))

        result = {
            "direction": d.label,
            "config_digest": construction.digest,
            "traces": [trace_record(t, o) for t, o in zip(traces, starts)],
        }
        write_text(to_json(result), output)
