# Python imports
from typing import Optional, Sequence


class DimensionException(ValueError):
    """
    Raised when tensor shapes do not line up for an operation.

    Args:
        detail (str): A detailed error message
        left_shape (Sequence[int], optional): Shape of the first operand
        right_shape (Sequence[int], optional): Shape of the second operand
        operation (str, optional): Name of the operation that failed
    """

    def __init__(
        self,
        detail: str = "Tensor dimensions do not match",
        left_shape: Optional[Sequence[int]] = None,
        right_shape: Optional[Sequence[int]] = None,
        operation: Optional[str] = None
    ):
        self.detail = detail
        self.left_shape = tuple(left_shape) if left_shape is not None else None
        self.right_shape = tuple(right_shape) if right_shape is not None else None
        self.operation = operation
        super().__init__(str(self))

    def __str__(self) -> str:
        base_msg = f"DimensionException: {self.detail}"
        if self.operation:
            base_msg += f" (operation: {self.operation})"
        if self.left_shape is not None or self.right_shape is not None:
            base_msg += f" (shapes: {self.left_shape} vs {self.right_shape})"
        return base_msg
