# Python imports
from typing import Optional


class PersistenceException(Exception):
    """
    Exception raised when a filesystem read or write fails.

    Attributes:
        detail: Detailed error message
        path: The file or directory involved
        original_error: The underlying OSError (if any)
    """
    def __init__(
        self,
        detail: str = "Filesystem operation failed",
        path: Optional[str] = None,
        original_error: Optional[Exception] = None
    ):
        self.detail = detail
        self.path = path
        self.original_error = original_error
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"PersistenceException: {self.detail}"
        if self.path:
            base_msg += f" (path: {self.path})"
        if self.original_error:
            base_msg += f" (original error: {str(self.original_error)})"
        return base_msg
