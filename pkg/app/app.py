# Python standard library imports
import logging
from typing import Any, Dict

# Application imports
# Config
from app.config.environment_config import EnvironmentConfig

# Error handling
from app.error_handling.exception_handler_manager import ExceptionHandlerManager

# Logging
from app.logging.logging_config import setup_logging

# Repositories
from app.repository.checkpoint_repository import CheckpointRepository

# Services
from app.service.experiment_service import ExperimentService


def init_app() -> Dict[str, Any]:
    """Loads the environment, sets up logging and builds the shared services once per process."""
    EnvironmentConfig.load_environment()
    setup_logging()
    logger = logging.getLogger(__name__)

    repositories = {
        'checkpoint': CheckpointRepository()
    }
    services = create_services(repositories)
    services['exception_handler_manager'] = ExceptionHandlerManager()

    logger.debug("Services initialized: %s", ", ".join(sorted(services)))
    return services


def create_services(repositories: Dict[str, Any]) -> Dict[str, Any]:
    """Creates and returns a dictionary of service instances."""
    return {
        'experiment': ExperimentService(repositories['checkpoint'])
    }
