# Python imports
from typing import Optional


class CheckpointCorruptionException(Exception):
    """
    Raised when checkpoint bytes cannot be decoded: bad magic, unsupported
    version, truncation or trailing garbage. Loading never yields partial state.
    """

    def __init__(self, detail: str = "Checkpoint is corrupt", path: Optional[str] = None, offset: Optional[int] = None):
        self.detail = detail
        self.path = path
        self.offset = offset
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"CheckpointCorruptionException: {self.detail}"
        if self.path:
            base_msg += f" (path: {self.path})"
        if self.offset is not None:
            base_msg += f" (byte offset: {self.offset})"
        return base_msg


class CheckpointConsistencyException(Exception):
    """Raised when checkpoint metadata disagrees with its tensor table."""

    def __init__(self, detail: str = "Checkpoint metadata disagrees with tensors", key: Optional[str] = None):
        self.detail = detail
        self.key = key
        super().__init__(str(self))

    def __str__(self) -> str:
        key_info = f" (metadata key: {self.key})" if self.key else ""
        return f"CheckpointConsistencyException: {self.detail}{key_info}"
