"""
Shared plumbing for the rootcloak commands: settings loading, logging
lifecycle, construction with error mapping, and output writing.
"""

import csv
import io
import sys
import uuid
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, List, Sequence

import typer

from rootcloak.cli.terminal import application
from rootcloak.config import Settings, get_settings
from rootcloak.core.construction import Construction, config_digest, resolve_config
from rootcloak.core.error_handling import emit_error_json, handle_error
from rootcloak.core.exceptions import ConfigInvalid, RootCloakError
from rootcloak.logging.events import EventContext, EventFilter
from rootcloak.logging.logger import LoggingConfig
from rootcloak.logging.transport import create_transport

EXIT_PASS = 0
EXIT_FAILED = 1
EXIT_INVALID = 2

CONFIG_HELP = "Path to a YAML or JSON config file (default: rootcloak.config.yaml found from the current directory)"
SET_HELP = "Override a setting, e.g. --set epsilon=0.01 or --set integrator.rel_tol=1e-10 (repeatable)"
OUTPUT_HELP = "Write the result to this file instead of stdout"


def fail(e: Exception, code: int = EXIT_INVALID, suggestion: str | None = None) -> None:
    """Print the error for humans and as one JSON line, then exit with `code`."""
    label = "Configuration error" if isinstance(e, ConfigInvalid) else type(e).__name__
    handle_error(e, label, suggestion)
    emit_error_json(e)
    raise typer.Exit(code)


def load_settings(config: Path | None, overrides: List[str] | None) -> Settings:
    try:
        return get_settings(config, overrides)
    except ConfigInvalid as e:
        fail(e, suggestion="Run 'rootcloak check' to see the resolved configuration.")


@contextmanager
def command_run(command: str, settings: Settings) -> Iterator[EventContext]:
    """Configure logging for one command and tag every event with a run id."""
    context = EventContext(run_id=uuid.uuid4().hex, config_digest=config_digest(settings), command=command)
    event_filter = EventFilter(min_level=application.log_level(settings.logger.level))
    try:
        transport = create_transport(settings.logger, event_filter=event_filter)
    except ValueError as e:
        fail(ConfigInvalid(str(e), field="logger"))
    with LoggingConfig.managed(
        event_filter=event_filter,
        transport=transport,
        progress_display=settings.logger.progress_display,
        context=context,
    ):
        yield context


def construct(settings: Settings) -> Construction:
    """resolve_config, mapping every construction failure to exit code 2."""
    try:
        return resolve_config(settings)
    except RootCloakError as e:
        fail(e)


def write_text(text: str, output: Path | None) -> None:
    if output is None:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
        sys.stdout.flush()
        return
    try:
        output.parent.mkdir(parents=True, exist_ok=True)
        output.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    except OSError as e:
        fail(RootCloakError(f"Could not write {output}", str(e)))


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return format(float(value), ".17g")


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()
