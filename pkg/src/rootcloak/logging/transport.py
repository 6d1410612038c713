"""
Transports for the rootcloak logger, and the in-process event bus.
"""

import json
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Protocol

from rich.json import JSON
from rich.text import Text

from rootcloak.config import LoggerSettings
from rootcloak.console import error_console
from rootcloak.logging.events import Event, EventFilter
from rootcloak.logging.json_serializer import JSONSerializer
from rootcloak.logging.listeners import EventListener, LifecycleAwareListener


class EventTransport(Protocol):
    """
    Pluggable interface for sending events out of the process.
    """

    def send_event(self, event: Event) -> None: ...


class FilteredEventTransport(EventTransport, ABC):
    """
    Event transport that filters events based on a filter before sending.
    """

    def __init__(self, event_filter: EventFilter | None = None) -> None:
        self.filter = event_filter

    def send_event(self, event: Event) -> None:
        if not self.filter or self.filter.matches(event):
            self.send_matched_event(event)

    @abstractmethod
    def send_matched_event(self, event: Event) -> None:
        """Send an event to the external system."""


class NoOpTransport(FilteredEventTransport):
    """Default transport that does nothing (purely local)."""

    def send_matched_event(self, event: Event) -> None:
        pass


class ConsoleTransport(FilteredEventTransport):
    """Prints events on the error console so stdout stays free for CSV/JSON output."""

    def __init__(self, event_filter: EventFilter | None = None) -> None:
        super().__init__(event_filter=event_filter)
        self._serializer = JSONSerializer()
        self.log_level_styles: Dict[str, str] = {
            "info": "bold green",
            "debug": "dim white",
            "warning": "bold yellow",
            "error": "bold red",
        }

    def send_matched_event(self, event: Event) -> None:
        style = self.log_level_styles.get(event.type, "white")
        namespace = event.namespace
        if event.name:
            namespace = f"{namespace}.{event.name}"

        log_text = Text.assemble(
            (f"[{event.type.upper()}] ", style),
            (f"{event.timestamp.replace(microsecond=0).isoformat()} ", "cyan"),
            (f"{namespace} ", "magenta"),
            (f"- {event.message}", "white"),
        )
        error_console.print(log_text, style="none")
        if event.data:
            error_console.print(JSON.from_data(self._serializer(event.data)), style="none")


class FileTransport(FilteredEventTransport):
    """Transport that appends events to a JSONL file."""

    def __init__(
        self,
        filepath: str | Path,
        event_filter: EventFilter | None = None,
        mode: str = "a",
        encoding: str = "utf-8",
    ) -> None:
        super().__init__(event_filter=event_filter)
        self.filepath = Path(filepath)
        self.mode = mode
        self.encoding = encoding
        self._serializer = JSONSerializer()
        self._lock = threading.Lock()
        self.filepath.parent.mkdir(parents=True, exist_ok=True)

    def send_matched_event(self, event: Event) -> None:
        namespace = event.namespace
        if event.name:
            namespace = f"{namespace}.{event.name}"

        log_entry = {
            "level": event.type.upper(),
            "timestamp": event.timestamp.isoformat(),
            "namespace": namespace,
            "message": event.message,
        }
        if event.context:
            log_entry["context"] = event.context.model_dump(exclude_none=True)
        if event.data:
            log_entry["data"] = self._serializer(event.data)

        try:
            with self._lock, open(self.filepath, mode=self.mode, encoding=self.encoding) as f:
                f.write(json.dumps(log_entry, separators=(",", ":")) + "\n")
        except IOError as e:
            error_console.print(f"Error writing to log file {self.filepath}: {e}")


class EventBus:
    """
    In-process event bus: local listeners plus one outbound transport.
    Dispatch is synchronous and serialised by a lock, so events emitted from
    worker threads keep a single, consistent order.
    """

    _instance = None
    _instance_lock = threading.Lock()

    def __init__(self, transport: EventTransport | None = None) -> None:
        self.transport: EventTransport = transport or NoOpTransport()
        self.listeners: Dict[str, EventListener] = {}
        self._lock = threading.RLock()
        self._running = False

    @classmethod
    def get(cls, transport: EventTransport | None = None) -> "EventBus":
        """Get the singleton instance of the event bus."""
        with cls._instance_lock:
            if cls._instance is None:
                cls._instance = cls(transport=transport)
            elif transport is not None:
                cls._instance.transport = transport
            return cls._instance

    @classmethod
    def reset(cls) -> None:
        """Drop the singleton; tests use this to isolate listeners."""
        with cls._instance_lock:
            if cls._instance is not None:
                cls._instance.stop()
            cls._instance = None

    def add_listener(self, name: str, listener: EventListener) -> None:
        with self._lock:
            self.listeners[name] = listener
            if self._running and isinstance(listener, LifecycleAwareListener):
                listener.start()

    def remove_listener(self, name: str) -> None:
        with self._lock:
            listener = self.listeners.pop(name, None)
            if self._running and isinstance(listener, LifecycleAwareListener):
                listener.stop()

    def start(self) -> None:
        with self._lock:
            if self._running:
                return
            for listener in self.listeners.values():
                if isinstance(listener, LifecycleAwareListener):
                    listener.start()
            self._running = True

    def stop(self) -> None:
        with self._lock:
            if not self._running:
                return
            for listener in self.listeners.values():
                if isinstance(listener, LifecycleAwareListener):
                    listener.stop()
            self._running = False

    def emit(self, event: Event) -> None:
        """Send the event to the transport, then to every listener."""
        with self._lock:
            try:
                self.transport.send_event(event)
            except Exception as e:
                error_console.print(f"Error in transport: {e}")
            for listener in self.listeners.values():
                try:
                    listener.handle_event(event)
                except Exception as e:
                    error_console.print(f"Error in listener: {e}")


def create_transport(settings: LoggerSettings, event_filter: EventFilter | None = None) -> EventTransport:
    """Create event transport based on settings."""
    if settings.type == "none":
        return NoOpTransport(event_filter=event_filter)
    elif settings.type == "console":
        return ConsoleTransport(event_filter=event_filter)
    elif settings.type == "file":
        if not settings.path:
            raise ValueError("File path required for file transport")
        return FileTransport(filepath=settings.path, event_filter=event_filter)
    raise ValueError(f"Unsupported transport type: {settings.type}")
