# Python standard library imports
from typing import Any, Dict, Optional

# Third party imports
from pydantic import BaseModel, ConfigDict, Field


class ErrorResponse(BaseModel):
    """
    What a failed command reports.

    Attributes:
        status (str): Always "failed"
        type (str): Error family, e.g. "config_validation_error"
        detail (str): Human-readable message
        command (str): The subcommand that failed
        exit_code (int): Process exit code (2 for usage/validation, 1 otherwise)
        context (dict): Structured fields of the exception (field, path, task, ...)
    """
    status: str = "failed"
    type: str
    detail: str
    command: Optional[str] = None
    exit_code: int = Field(default=1, ge=1)
    context: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "status": "failed",
                "type": "config_validation_error",
                "detail": "tau: must satisfy 0 < tau < num_layers (8), got 9",
                "command": "continual",
                "exit_code": 2,
                "context": {"field": "tau"}
            }
        }
    )
