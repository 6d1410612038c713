"""
Listeners for the rootcloak event bus.
"""

import logging
import threading
from abc import ABC, abstractmethod
from typing import List

from rootcloak.event_progress import convert_log_event
from rootcloak.logging.events import Event, EventFilter, level_of


class EventListener(ABC):
    """Base listener that processes events."""

    @abstractmethod
    def handle_event(self, event: Event) -> None:
        """Process an incoming event."""


class LifecycleAwareListener(EventListener):
    """
    Optionally override start()/stop() for setup/teardown.
    The event bus calls these at bus start/stop time.
    """

    def start(self) -> None:
        pass

    def stop(self) -> None:
        pass


class FilteredListener(LifecycleAwareListener):
    """
    Only processes events that pass the given filter.
    Subclasses override handle_matched_event().
    """

    def __init__(self, event_filter: EventFilter | None = None) -> None:
        self.filter = event_filter

    def handle_event(self, event: Event) -> None:
        if not self.filter or self.filter.matches(event):
            self.handle_matched_event(event)

    def handle_matched_event(self, event: Event) -> None:
        pass


class LoggingListener(FilteredListener):
    """
    Routes events to Python's logging facility with appropriate severity level.
    """

    def __init__(
        self,
        event_filter: EventFilter | None = None,
        logger: logging.Logger | None = None,
    ) -> None:
        super().__init__(event_filter=event_filter)
        self.logger = logger or logging.getLogger("rootcloak")

    def handle_matched_event(self, event: Event) -> None:
        self.logger.log(
            level_of(event.type),
            "[%s] %s",
            event.namespace,
            event.message,
            extra={
                "event_data": event.data,
                "event_name": event.name,
            },
        )


class ProgressListener(LifecycleAwareListener):
    """
    Sees every event before filtering and forwards batch progress to the display.
    """

    def __init__(self, display=None) -> None:
        from rootcloak.progress_display import progress_display

        self.display = display or progress_display

    def start(self) -> None:
        self.display.start()

    def stop(self) -> None:
        self.display.stop()

    def handle_event(self, event: Event) -> None:
        if event.data:
            progress_event = convert_log_event(event)
            if progress_event:
                self.display.update(progress_event)


class CollectingListener(FilteredListener):
    """Keeps matched events in memory."""

    def __init__(self, event_filter: EventFilter | None = None) -> None:
        super().__init__(event_filter=event_filter)
        self._lock = threading.Lock()
        self.events: List[Event] = []

    def handle_matched_event(self, event: Event) -> None:
        with self._lock:
            self.events.append(event)

    def names(self) -> List[str]:
        with self._lock:
            return [e.name for e in self.events if e.name]
