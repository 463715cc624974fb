# Python standard library imports
from typing import List, Optional

# Third party imports
from pydantic import BaseModel


class StageSummary(BaseModel):
    """Stream metrics right after training task t (1-based)."""
    t: int
    task: str
    op: float
    bwt: float
    general_delta: float
    general_scores: List[float]
    num_experts: int
    final_loss: Optional[float] = None


class RunSummary(BaseModel):
    """Contents of summary.json."""
    mode: str
    tau: Optional[int]
    rank: int
    seed: int
    task_names: List[str]
    base_general_scores: List[float]
    trainable_parameters: int
    trainable_fraction: float
    stages: List[StageSummary] = []

    @property
    def final(self) -> Optional[StageSummary]:
        return self.stages[-1] if self.stages else None


class SweepRow(BaseModel):
    """One line of sweep.csv."""
    tau: int
    op: float
    bwt: float
    general_delta: float
    mean_entropy: float
    trainable_parameters: int
    compute_proxy: int
    run_dir: str
