import dataclasses
import math
from datetime import date, datetime
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterable, Set

import numpy as np


class JSONSerializer:
    """
    Turns event payloads (numpy arrays, pydantic reports, dataclasses) into
    plain JSON-compatible values. Non-finite floats become strings so the
    JSONL log stays strict JSON.
    """

    MAX_DEPTH = 32

    def __init__(self) -> None:
        self._processed_objects: Set[int] = set()

    def serialize(self, obj: Any) -> Any:
        """Main entry point for serialization."""
        self._processed_objects.clear()
        return self._serialize_object(obj, depth=0)

    def _serialize_float(self, value: float) -> Any:
        if math.isfinite(value):
            return value
        return str(value)

    def _serialize_object(self, obj: Any, depth: int = 0) -> Any:
        if obj is None:
            return None
        if depth > self.MAX_DEPTH:
            return str(obj)

        if isinstance(obj, (bool, np.bool_)):
            return bool(obj)
        if isinstance(obj, (int, np.integer)):
            return int(obj)
        if isinstance(obj, (float, np.floating)):
            return self._serialize_float(float(obj))
        if isinstance(obj, str):
            return obj
        if isinstance(obj, np.ndarray):
            return self._serialize_object(obj.tolist(), depth + 1)

        if isinstance(obj, (datetime, date)):
            return obj.isoformat()
        if isinstance(obj, Path):
            return str(obj)
        if isinstance(obj, Enum):
            return obj.value

        # Cycles only arise through containers and objects
        obj_id = id(obj)
        if obj_id in self._processed_objects:
            return str(obj)
        self._processed_objects.add(obj_id)

        try:
            if hasattr(obj, "model_dump"):
                return self._serialize_object(obj.model_dump(), depth + 1)
            if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
                return self._serialize_object(dataclasses.asdict(obj), depth + 1)
            if isinstance(obj, Dict):
                return {str(key): self._serialize_object(value, depth + 1) for key, value in obj.items()}
            if isinstance(obj, Iterable):
                return [self._serialize_object(item, depth + 1) for item in obj]
            if callable(obj):
                return f"<callable: {getattr(obj, '__name__', type(obj).__name__)}>"
            return str(obj)
        except Exception as e:
            return f"<unserializable: {type(obj).__name__}, error: {str(e)}>"
        finally:
            self._processed_objects.discard(obj_id)

    def __call__(self, obj: Any) -> Any:
        """Make the serializer callable."""
        return self.serialize(obj)
