# Python standard library imports
import json
import logging
from typing import Any, Dict, Mapping, Optional

# Third party imports
from pydantic import ValidationError

# Application imports
from app.config.environment_config import EnvironmentConfig
from app.error_handling.exceptions.config_validation_exception import ConfigValidationException
from app.error_handling.exceptions.persistence_exception import PersistenceException
from app.models.config.run_config import RunConfig

logger = logging.getLogger(__name__)


def _field_of(error: Dict[str, Any]) -> Optional[str]:
    """Field named by one pydantic error; model-level errors carry it as a "field: ..." message prefix."""
    if error.get("loc"):
        return ".".join(str(part) for part in error["loc"])
    message = str(error.get("msg", ""))
    head = message.split(":", 1)[0].replace("Value error, ", "").strip()
    return head if head in RunConfig.model_fields else None


def read_config_file(path: str) -> Dict[str, Any]:
    """
    Raises:
        PersistenceException: If the file cannot be read
        ConfigValidationException: If the text is not a JSON object
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise PersistenceException("Could not read config file", path, e) from e
    try:
        values = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigValidationException(f"Config file is not valid JSON: {e}", None) from e
    if not isinstance(values, dict):
        raise ConfigValidationException("Config file must hold a JSON object", None)
    return values


def parse_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Merge the JSON file (optional) with command-line overrides and validate.

    Precedence: overrides > file > PMOE_SEED (seed only) > defaults. None-valued
    overrides mean "flag not given" and are ignored.

    Raises:
        ConfigValidationException: On unknown keys or violated invariants, naming the field
    """
    values: Dict[str, Any] = read_config_file(path) if path else {}
    if "seed" not in values and not (overrides and overrides.get("seed") is not None):
        try:
            env_seed = EnvironmentConfig.seed()
        except ValueError as e:
            raise ConfigValidationException(str(e), "seed") from e
        if env_seed is not None:
            values["seed"] = env_seed
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})

    try:
        config = RunConfig(**values)
    except ValidationError as e:
        errors = e.errors()
        messages = [f"{_field_of(err) or 'config'}: {err.get('msg')}" for err in errors]
        field = next((f for f in (_field_of(err) for err in errors) if f), None)
        logger.error("Invalid configuration: %s", "; ".join(messages))
        raise ConfigValidationException("; ".join(messages), field, messages) from e
    logger.debug("Resolved configuration: %s", config.model_dump_json())
    return config
