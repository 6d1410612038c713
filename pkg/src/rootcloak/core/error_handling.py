"""
Error handling utilities for command execution.
"""

import json
import sys

from rich import print

from rootcloak.core.exceptions import RootCloakError
from rootcloak.logging.json_serializer import JSONSerializer


def handle_error(e: Exception, error_type: str, suggestion: str | None = None) -> None:
    """
    Handle errors with consistent formatting and messaging.

    Args:
        e: The exception that was raised
        error_type: Type of error to display
        suggestion: Optional suggestion message to display
    """
    print(f"\n[bold red]{error_type}:", file=sys.stderr)
    print(getattr(e, "message", str(e)), file=sys.stderr)
    if hasattr(e, "details") and e.details:
        print("\nDetails:", file=sys.stderr)
        print(e.details, file=sys.stderr)
    if suggestion:
        print(f"\n{suggestion}", file=sys.stderr)


def error_record(e: Exception) -> dict:
    """Machine readable form of an error, one JSON object per failure."""
    record = {
        "error": type(e).__name__,
        "message": getattr(e, "message", str(e)),
        "details": getattr(e, "details", ""),
    }
    if isinstance(e, RootCloakError):
        for attr in ("field", "pair", "condition_number", "min_eigenvalue"):
            value = getattr(e, attr, None)
            if value is not None:
                record[attr] = list(value) if isinstance(value, tuple) else value
    return record


def emit_error_json(e: Exception) -> None:
    """Write the error record to stderr as a single line of strict JSON; inf becomes "inf"."""
    record = JSONSerializer().serialize(error_record(e))
    sys.stderr.write(json.dumps(record, separators=(",", ":"), allow_nan=False) + "\n")
    sys.stderr.flush()
