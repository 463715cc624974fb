# Standard library imports
from typing import Callable, Dict, Optional

# Error handler imports
from app.error_handling.handlers.checkpoint_handler import CheckpointHandler
from app.error_handling.handlers.global_handler import GlobalHandler
from app.error_handling.handlers.input_handler import InputHandler
from app.error_handling.handlers.numeric_handler import NumericHandler
from app.error_handling.handlers.persistence_handler import PersistenceHandler
from app.error_handling.handlers.training_handler import TrainingHandler
from app.error_handling.handlers.usage_handler import UsageHandler
from app.error_handling.handlers.validation_handler import ValidationHandler
from app.models.dto.error_response import ErrorResponse


class ExceptionHandlerManager:
    """Coordinates all exception handlers by initializing and delegating to them."""

    def __init__(self):
        self.handlers = {
            'usage': UsageHandler(),
            'validation': ValidationHandler(),
            'input': InputHandler(),
            'numeric': NumericHandler(),
            'training': TrainingHandler(),
            'checkpoint': CheckpointHandler(),
            'persistence': PersistenceHandler(),
            'global': GlobalHandler()
        }
        self._routes: Optional[Dict[type, Callable]] = None

    def handle_usage_error(self, command: str, exc):
        return self.handlers['usage'].handle_usage_error(command, exc)

    def handle_validation_error(self, command: str, exc):
        return self.handlers['validation'].handle_validation_error(command, exc)

    def handle_input_error(self, command: str, exc):
        return self.handlers['input'].handle_input_error(command, exc)

    def handle_numeric_error(self, command: str, exc):
        return self.handlers['numeric'].handle_numeric_error(command, exc)

    def handle_divergence_error(self, command: str, exc):
        return self.handlers['training'].handle_divergence_error(command, exc)

    def handle_checkpoint_corruption_error(self, command: str, exc):
        return self.handlers['checkpoint'].handle_corruption_error(command, exc)

    def handle_checkpoint_consistency_error(self, command: str, exc):
        return self.handlers['checkpoint'].handle_consistency_error(command, exc)

    def handle_persistence_error(self, command: str, exc):
        return self.handlers['persistence'].handle_persistence_error(command, exc)

    def handle_global_error(self, command: str, exc):
        return self.handlers['global'].handle_global_error(command, exc)

    def handle(self, command: str, exc: Exception) -> ErrorResponse:
        """Dispatch to the handler registered for the closest class in the exception's MRO."""
        if self._routes is None:
            # imported here: exception_config imports this module
            from app.error_handling.exception_config import get_exception_handlers
            self._routes = get_exception_handlers(self)
        for cls in type(exc).__mro__:
            if cls in self._routes:
                return self._routes[cls](command, exc)
        return self.handle_global_error(command, exc)
