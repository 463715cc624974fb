# Python imports
import logging
from typing import Optional

# Local imports
from app.models.dto.error_response import ErrorResponse

USAGE_EXIT_CODE = 2
FAILURE_EXIT_CODE = 1


class BaseExceptionHandler:
    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def _create_base_response(
        self,
        command: Optional[str],
        exc: Exception,
        error_type: str,
        exit_code: int = FAILURE_EXIT_CODE
    ) -> ErrorResponse:
        """Creates the base response structure used by all handlers"""
        return ErrorResponse(
            type=error_type,
            detail=str(getattr(exc, "detail", str(exc))),
            command=command,
            exit_code=exit_code
        )

    def _log_error(self, command: Optional[str], exc: Exception, additional_info: str = ""):
        """Centralized error logging"""
        error_msg = f"Error in '{command or 'pmoe'}': {getattr(exc, 'detail', str(exc))}"
        if additional_info:
            error_msg += f", {additional_info}"
        self.logger.error(error_msg)
