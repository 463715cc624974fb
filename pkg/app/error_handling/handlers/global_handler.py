# Standard library imports
import traceback

# Local imports
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class GlobalHandler(BaseExceptionHandler):
    def handle_global_error(self, command: str, exc: Exception):
        stack_trace = traceback.format_exc()
        self.logger.error(
            "Unhandled exception in %s\nError: %s\nStack trace:\n%s",
            command, str(exc), stack_trace
        )
        return self._create_base_response(
            command,
            Exception(f"An unexpected error occurred: {type(exc).__name__}: {exc}"),
            "internal_error"
        )
