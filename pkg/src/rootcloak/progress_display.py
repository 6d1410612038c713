"""
Shared progress display instance for batch runs.
"""

from rootcloak.console import status_console
from rootcloak.logging.rich_progress import RichProgressDisplay

progress_display = RichProgressDisplay(status_console)
