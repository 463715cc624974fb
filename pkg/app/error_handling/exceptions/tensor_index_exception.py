# Python imports
from typing import Optional


class TensorIndexException(IndexError):
    """Raised for an axis, token or target index outside its valid range."""

    def __init__(self, detail: str = "Index out of range", index: Optional[int] = None, bound: Optional[int] = None):
        """
        Initialize the exception.

        Args:
            detail (str): A detailed error message.
            index (int, optional): The offending index.
            bound (int, optional): The exclusive upper bound that was violated.
        """
        self.detail = detail
        self.index = index
        self.bound = bound
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"TensorIndexException: {self.detail}"
        if self.index is not None:
            base_msg += f" (index: {self.index}, bound: {self.bound})"
        return base_msg
