# Local imports
from app.error_handling.exceptions.checkpoint_exception import (
    CheckpointConsistencyException,
    CheckpointCorruptionException
)
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class CheckpointHandler(BaseExceptionHandler):
    def handle_corruption_error(self, command: str, exc: CheckpointCorruptionException):
        self._log_error(command, exc)
        response = self._create_base_response(command, exc, "checkpoint_corruption_error")
        if exc.path:
            response.context["path"] = exc.path
        if exc.offset is not None:
            response.context["offset"] = exc.offset
        return response

    def handle_consistency_error(self, command: str, exc: CheckpointConsistencyException):
        self._log_error(command, exc)
        response = self._create_base_response(command, exc, "checkpoint_consistency_error")
        if exc.key:
            response.context["key"] = exc.key
        return response
