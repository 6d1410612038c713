"""Rich-based progress display for batch runs."""

from typing import Dict, Optional

from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TaskID, TextColumn, TimeElapsedColumn

from rootcloak.console import console as default_console
from rootcloak.event_progress import ProgressAction, ProgressEvent


class RichProgressDisplay:
    """Rich-based display for progress events. One bar per batch target."""

    def __init__(self, console: Optional[Console] = None) -> None:
        self.console = console or default_console
        self._taskmap: Dict[str, TaskID] = {}
        self._progress = Progress(
            SpinnerColumn(spinner_name="simpleDotsScrolling"),
            TextColumn("[progress.description]{task.description}|"),
            TextColumn(text_format="{task.fields[target]:<28}", style="Bold Blue"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=self.console,
            transient=False,
        )
        self._started = False

    def start(self) -> None:
        if not self._started:
            self._progress.start()
            self._started = True

    def stop(self) -> None:
        if self._started:
            self._progress.stop()
            self._started = False

    def _get_action_style(self, action: ProgressAction) -> str:
        return {
            ProgressAction.BUILDING: "bold yellow",
            ProgressAction.TRACING: "bold magenta",
            ProgressAction.BISECTING: "bold cyan",
            ProgressAction.FINISHED: "black on green",
            ProgressAction.FATAL_ERROR: "bold red",
        }.get(action, "white")

    def update(self, event: ProgressEvent) -> None:
        """Create or advance the bar for the event's target."""
        description = f"[{self._get_action_style(event.action)}]{event.action.value:<10}"
        task_id = self._taskmap.get(event.target)
        if task_id is None:
            task_id = self._progress.add_task(description, total=event.total, target=event.target)
            self._taskmap[event.target] = task_id
        self._progress.update(
            task_id,
            description=description,
            completed=event.completed if event.completed is not None else None,
            total=event.total,
        )
