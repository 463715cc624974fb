# Local imports
from app.error_handling.exceptions.input_exception import InputException, SequenceLengthException
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class InputHandler(BaseExceptionHandler):
    def handle_input_error(self, command: str, exc: InputException):
        self._log_error(command, exc)
        response = self._create_base_response(command, exc, "input_error")
        if exc.source:
            response.context["source"] = exc.source
        if isinstance(exc, SequenceLengthException):
            response.context["length"] = exc.length
            response.context["max_length"] = exc.max_length
        return response
