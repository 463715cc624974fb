# Local imports
from app.error_handling.exceptions.usage_exception import UsageException
from app.error_handling.handlers.base_handler import USAGE_EXIT_CODE, BaseExceptionHandler


class UsageHandler(BaseExceptionHandler):
    def handle_usage_error(self, command: str, exc: UsageException):
        self._log_error(command, exc)
        response = self._create_base_response(command, exc, "usage_error", USAGE_EXIT_CODE)
        if exc.usage:
            response.context["usage"] = exc.usage
        return response
