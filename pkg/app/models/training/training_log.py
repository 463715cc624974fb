# Python standard library imports
from typing import List

# Third party imports
from pydantic import BaseModel, ConfigDict


class TrainLogRow(BaseModel):
    """One optimizer step; the columns of train_log.csv."""
    model_config = ConfigDict(frozen=True)

    step: int
    task: int
    loss: float
    aux_loss: float
    lr: float


class TrainingLog(BaseModel):
    """Per-step records of one or more training phases, in execution order."""

    rows: List[TrainLogRow] = []

    def append(self, step: int, task: int, loss: float, aux_loss: float, lr: float) -> None:
        self.rows.append(TrainLogRow(step=step, task=task, loss=loss, aux_loss=aux_loss, lr=lr))

    def extend(self, other: "TrainingLog") -> None:
        self.rows.extend(other.rows)

    def losses(self, task: int = None) -> List[float]:
        return [r.loss for r in self.rows if task is None or r.task == task]

    def __len__(self) -> int:
        return len(self.rows)
