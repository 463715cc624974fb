# Python imports
import math

# Local imports
from app.error_handling.exceptions.divergence_exception import DivergenceException
from app.error_handling.handlers.base_handler import BaseExceptionHandler


class TrainingHandler(BaseExceptionHandler):
    def handle_divergence_error(self, command: str, exc: DivergenceException):
        self._log_error(command, exc, f"task: {exc.task_index}, step: {exc.step}")
        response = self._create_base_response(command, exc, "divergence_error")
        response.context["task_index"] = exc.task_index
        response.context["step"] = exc.step
        response.context["loss"] = exc.loss if math.isfinite(exc.loss) else str(exc.loss)
        return response
