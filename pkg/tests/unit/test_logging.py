import json
import logging

import numpy as np

from rootcloak.config import LoggerSettings
from rootcloak.event_progress import ProgressAction, convert_log_event
from rootcloak.logging.events import Event, EventContext, EventFilter
from rootcloak.logging.json_serializer import JSONSerializer
from rootcloak.logging.listeners import CollectingListener, LoggingListener
from rootcloak.logging.logger import LoggingConfig, event_context, get_logger
from rootcloak.logging.transport import ConsoleTransport, EventBus, FileTransport, NoOpTransport, create_transport


def test_get_logger_is_cached():
    assert get_logger("rootcloak.test") is get_logger("rootcloak.test")


def test_events_reach_listeners():
    collector = CollectingListener()
    EventBus.get().add_listener("collector", collector)
    logger = get_logger("rootcloak.test")
    logger.info("traced", name="ray.traced", lateral=1e-9)
    event = collector.events[-1]
    assert event.namespace == "rootcloak.test"
    assert event.data == {"lateral": 1e-9}
    assert collector.names() == ["ray.traced"]


def test_filter_by_level_and_namespace():
    event_filter = EventFilter(min_level="warning", namespaces={"rootcloak.geometry"})
    collector = CollectingListener(event_filter=event_filter)
    EventBus.get().add_listener("collector", collector)
    get_logger("rootcloak.geometry.metricfield").info("ignored")
    get_logger("rootcloak.verify").warning("other namespace")
    get_logger("rootcloak.geometry.metricfield").warning("kept")
    assert [e.message for e in collector.events] == ["kept"]


def test_event_context_logs_duration():
    collector = CollectingListener()
    EventBus.get().add_listener("collector", collector)
    with event_context(get_logger("rootcloak.test"), "Stage", name="stage.done", n=2):
        pass
    event = collector.events[-1]
    assert event.name == "stage.done"
    assert event.data["n"] == 2
    assert event.data["duration"] >= 0


def test_serializer_handles_numpy_and_non_finite():
    data = {"x": np.array([1.0, 2.5]), "k": np.int64(3), "flag": np.bool_(True), "bad": float("nan"), "big": float("inf")}
    assert JSONSerializer().serialize(data) == {"x": [1.0, 2.5], "k": 3, "flag": True, "bad": "nan", "big": "inf"}


def test_file_transport_writes_jsonl(tmp_path):
    path = tmp_path / "logs" / "run.jsonl"
    transport = FileTransport(path)
    EventBus.get(transport=transport)
    context = EventContext(run_id="abc", config_digest="f00", command="verify")
    get_logger("rootcloak.test").warning("drifted", name="ray.drift", context=context, drift=np.float64(2e-9))
    lines = path.read_text().splitlines()
    record = json.loads(lines[-1])
    assert record["level"] == "WARNING"
    assert record["namespace"] == "rootcloak.test.ray.drift"
    assert record["context"] == {"run_id": "abc", "config_digest": "f00", "command": "verify"}
    assert record["data"] == {"drift": 2e-9}


def test_create_transport():
    assert isinstance(create_transport(LoggerSettings(type="none")), NoOpTransport)
    assert isinstance(create_transport(LoggerSettings(type="console")), ConsoleTransport)


def test_logging_listener_bridges_to_stdlib(caplog):
    EventBus.get().add_listener("logging", LoggingListener())
    with caplog.at_level(logging.DEBUG, logger="rootcloak"):
        get_logger("rootcloak.test").error("solve failed")
    assert any("solve failed" in r.getMessage() and r.levelno == logging.ERROR for r in caplog.records)


def test_managed_lifecycle_attaches_context():
    collector = CollectingListener()
    context = EventContext(run_id="run-1")
    with LoggingConfig.managed(transport=NoOpTransport(), context=context):
        EventBus.get().add_listener("collector", collector)
        get_logger("rootcloak.test").info("inside")
    assert collector.events[-1].context.run_id == "run-1"
    assert LoggingConfig.context is None


def test_progress_events_are_converted():
    event = Event(
        type="debug",
        namespace="rootcloak.executor",
        message="root:1 2/5",
        data={"progress_action": ProgressAction.TRACING, "target": "root:1", "completed": 2, "total": 5},
    )
    progress = convert_log_event(event)
    assert progress.action == ProgressAction.TRACING
    assert progress.target == "root:1"
    assert "[2/5]" in str(progress)
    assert convert_log_event(Event(type="info", namespace="x", message="plain")) is None
