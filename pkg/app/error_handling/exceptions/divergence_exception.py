# Python imports
from typing import Optional


class DivergenceException(Exception):
    """
    Raised when the training loss stops being finite.

    Args:
        detail (str): A detailed error message
        task_index (int, optional): Stream position of the task being trained, None for pretraining
        step (int): Optimizer step at which the loss was observed
        loss (float): The offending loss value
    """

    def __init__(
        self,
        detail: str = "Training diverged",
        task_index: Optional[int] = None,
        step: int = 0,
        loss: float = float("nan")
    ):
        self.detail = detail
        self.task_index = task_index
        self.step = step
        self.loss = loss
        super().__init__(str(self))

    def __str__(self) -> str:
        task_info = f"task {self.task_index}" if self.task_index is not None else "pretraining"
        return f"DivergenceException: {self.detail} ({task_info}, step {self.step}, loss {self.loss})"
