# Local imports
from app.error_handling.exception_handler_manager import ExceptionHandlerManager
from app.error_handling.exceptions.checkpoint_exception import (
    CheckpointConsistencyException,
    CheckpointCorruptionException
)
from app.error_handling.exceptions.config_validation_exception import ConfigValidationException
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.dimension_exception import DimensionException
from app.error_handling.exceptions.divergence_exception import DivergenceException
from app.error_handling.exceptions.input_exception import InputException
from app.error_handling.exceptions.non_finite_exception import NonFiniteException
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.error_handling.exceptions.usage_exception import UsageException


def get_exception_handlers(handler: ExceptionHandlerManager) -> dict:
    """
    Returns a mapping of exceptions to their handlers.
    Centralizes exception handling configuration.
    """
    return {
        CheckpointConsistencyException: handler.handle_checkpoint_consistency_error,
        CheckpointCorruptionException: handler.handle_checkpoint_corruption_error,
        ConfigValidationException: handler.handle_validation_error,
        ContractException: handler.handle_numeric_error,
        DimensionException: handler.handle_numeric_error,
        DivergenceException: handler.handle_divergence_error,
        InputException: handler.handle_input_error,
        NonFiniteException: handler.handle_numeric_error,
        PersistenceException: handler.handle_persistence_error,
        TensorIndexException: handler.handle_numeric_error,
        UsageException: handler.handle_usage_error,

        #exception to the alphabetical order so it can be easily tested
        Exception: handler.handle_global_error,
    }
