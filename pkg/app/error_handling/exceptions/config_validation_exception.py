# Python imports
from typing import List, Optional


class ConfigValidationException(ValueError):
    """
    Raised when a run configuration fails validation.

    Attributes:
        detail: Detailed error message
        field: Name of the first offending field
        errors: Every individual validation message, for reporting
    """

    def __init__(self, detail: str = "Invalid configuration", field: Optional[str] = None, errors: Optional[List[str]] = None):
        self.detail = detail
        self.field = field
        self.errors = errors or []
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"ConfigValidationException: {self.detail}"
        if self.field:
            base_msg += f" (field: {self.field})"
        return base_msg
