# Local imports
from app.error_handling.exceptions.config_validation_exception import ConfigValidationException
from app.error_handling.handlers.base_handler import USAGE_EXIT_CODE, BaseExceptionHandler


class ValidationHandler(BaseExceptionHandler):
    def handle_validation_error(self, command: str, exc: ConfigValidationException):
        self._log_error(command, exc, f"field: {exc.field}" if exc.field else "")
        response = self._create_base_response(command, exc, "config_validation_error", USAGE_EXIT_CODE)
        if exc.field:
            response.context["field"] = exc.field
        if exc.errors:
            response.context["errors"] = exc.errors
        return response
