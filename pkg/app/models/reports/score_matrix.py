# Python standard library imports
from typing import List

# Third party imports
from pydantic import BaseModel, field_validator

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException


class ScoreMatrix(BaseModel):
    """
    Lower-triangular score matrix of a task stream, in percent.

    Stage t (1-based) owns row t, which holds the scores R[t][1..t] of every
    task trained so far, measured right after training task t.
    """

    task_names: List[str]
    rows: List[List[float]] = []

    @field_validator("rows")
    @classmethod
    def validate_rows(cls, rows: List[List[float]]) -> List[List[float]]:
        for t, row in enumerate(rows, start=1):
            if len(row) != t:
                raise ValueError(f"row {t} must hold {t} scores, got {len(row)}")
            if any(not 0.0 <= v <= 100.0 for v in row):
                raise ValueError(f"row {t} has a score outside [0, 100]")
        return rows

    @property
    def stages(self) -> int:
        return len(self.rows)

    def append_row(self, scores: List[float]) -> None:
        """Record stage t = stages + 1."""
        t = self.stages + 1
        if len(scores) != t:
            raise ContractException(f"Stage {t} needs {t} scores, got {len(scores)}", "ScoreMatrix.append_row")
        if any(not 0.0 <= v <= 100.0 for v in scores):
            raise ContractException(f"Stage {t} has a score outside [0, 100]", "ScoreMatrix.append_row")
        self.rows.append([float(v) for v in scores])

    def get(self, t: int, i: int) -> float:
        """R[t][i] with 1-based t and i ≤ t."""
        if not 1 <= i <= t or t > self.stages:
            raise ContractException(f"R[{t}][{i}] is not populated", "ScoreMatrix.get")
        return self.rows[t - 1][i - 1]

    def entries(self) -> List[tuple]:
        """(t, i, score) triples in row-major order; the rows of metrics.csv."""
        return [(t, i, score) for t, row in enumerate(self.rows, start=1) for i, score in enumerate(row, start=1)]
