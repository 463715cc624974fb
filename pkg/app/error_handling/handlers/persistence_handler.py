# Local imports
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class PersistenceHandler(BaseExceptionHandler):
    def handle_persistence_error(self, command: str, exc: PersistenceException):
        self._log_error(command, exc, f"path: {exc.path}" if exc.path else "")
        response = self._create_base_response(command, exc, "persistence_error")
        if exc.path:
            response.context["path"] = exc.path
        return response
