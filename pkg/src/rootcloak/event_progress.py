"""Module for converting log events to progress events."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel

from rootcloak.logging.events import Event


class ProgressAction(str, Enum):
    """Progress actions available in the system."""

    BUILDING = "Building"
    TRACING = "Tracing"
    BISECTING = "Bisecting"
    FINISHED = "Finished"
    FATAL_ERROR = "Error"


class ProgressEvent(BaseModel):
    """Represents a progress event converted from a log event."""

    action: ProgressAction
    target: str
    completed: int | None = None
    total: int | None = None
    details: Optional[str] = None

    def __str__(self) -> str:
        """Format the progress event for display."""
        base = f"{self.action.ljust(10)}. {self.target}"
        if self.total:
            base += f" [{self.completed or 0}/{self.total}]"
        if self.details:
            base += f" - {self.details}"
        return base


def convert_log_event(event: Event) -> Optional[ProgressEvent]:
    """Convert a log event to a progress event if applicable."""
    if not event.data:
        return None

    progress_action = event.data.get("progress_action")
    if not progress_action:
        return None

    details = None
    if progress_action == ProgressAction.FATAL_ERROR:
        details = event.data.get("error_message", "An error occurred")

    return ProgressEvent(
        action=ProgressAction(progress_action),
        target=event.data.get("target") or event.namespace,
        completed=event.data.get("completed"),
        total=event.data.get("total"),
        details=details or event.data.get("details"),
    )
