# Python standard library imports
from typing import List

# Third party imports
import numpy as np
from pydantic import BaseModel, model_validator


class AllocationMatrix(BaseModel):
    """
    Mean router probability of each expert (columns) over the test tokens
    of each task (rows).
    """

    task_ids: List[int]
    probabilities: List[List[float]]

    @model_validator(mode="after")
    def validate_rows(self) -> "AllocationMatrix":
        if len(self.task_ids) != len(self.probabilities):
            raise ValueError("one row per task is required")
        for task_id, row in zip(self.task_ids, self.probabilities):
            if any(p < 0 for p in row) or abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(f"row of task {task_id} is not a probability vector")
        return self

    @property
    def num_experts(self) -> int:
        return len(self.probabilities[0]) if self.probabilities else 0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=np.float64)

    def dominance_failures(self) -> List[int]:
        """Tasks whose own expert (same index as the task's stream position) is not the row maximum."""
        failures = []
        for row_index, (task_id, row) in enumerate(zip(self.task_ids, self.probabilities)):
            if row_index >= len(row) or row[row_index] < max(row):
                failures.append(task_id)
        return failures

    def is_diagonally_dominant(self) -> bool:
        return not self.dominance_failures()
