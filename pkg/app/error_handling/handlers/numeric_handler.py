# Local imports
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class NumericHandler(BaseExceptionHandler):
    """Shape, index, contract and non-finite failures of the tensor and model code."""

    CONTEXT_FIELDS = ("operation", "left_shape", "right_shape", "index", "bound", "bad_count")

    def handle_numeric_error(self, command: str, exc: Exception):
        self._log_error(command, exc, f"type: {type(exc).__name__}")
        response = self._create_base_response(command, exc, "numeric_error")
        for name in self.CONTEXT_FIELDS:
            value = getattr(exc, name, None)
            if value is not None:
                response.context[name] = list(value) if isinstance(value, tuple) else value
        return response
