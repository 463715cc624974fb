# Python imports
from typing import Optional


class InputException(ValueError):
    """Exception raised for unusable input data (empty corpora, bad symbols, ...)."""

    def __init__(self, detail: str = "Invalid input data", source: Optional[str] = None):
        """
        Initialize the exception.

        Args:
            detail (str): A detailed error message
            source (str, optional): What the data was, e.g. a dataset name or file path
        """
        self.detail = detail
        self.source = source
        super().__init__(str(self))

    def __str__(self) -> str:
        source_info = f" (source: {self.source})" if self.source else ""
        return f"{self.detail}{source_info}"


class SequenceLengthException(InputException):
    """Raised when a token sequence exceeds the model context."""

    def __init__(self, length: int, max_length: int):
        self.length = length
        self.max_length = max_length
        super().__init__(
            detail=f"Sequence of length {length} exceeds max_seq_len {max_length}",
            source="token sequence"
        )
