# Python standard library imports
from typing import List

# Third party imports
from pydantic import BaseModel, ConfigDict

# Application imports
from app.models.tasks.example import Example
from app.models.tasks.task_spec import TaskSpec


class TaskSplits(BaseModel):
    """Train and test examples of one task; no prompt appears in both."""
    model_config = ConfigDict(frozen=True)

    spec: TaskSpec
    train: List[Example]
    test: List[Example]
