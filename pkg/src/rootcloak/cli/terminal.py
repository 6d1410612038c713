from rootcloak.console import status_console


class Application:
    """Verbosity shared by every command: -1 quiet, 0 normal, 1 verbose."""

    def __init__(self, verbosity: int = 0) -> None:
        self.verbosity = verbosity

    def set_verbosity(self, verbosity: int) -> None:
        self.verbosity = verbosity
        # errors go to error_console and are never silenced
        status_console.quiet = verbosity < 0

    def log_level(self, configured: str) -> str:
        """--verbose lowers the event level to debug for this run."""
        return "debug" if self.verbosity > 0 else configured


application = Application()
