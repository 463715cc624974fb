# Python standard library imports
from typing import List, Optional

# Third party imports
from pydantic import BaseModel

# Application imports
from app.models.reports.allocation_matrix import AllocationMatrix


class TokenAllocation(BaseModel):
    """Router decision at one position of a sequence."""
    position: int
    token: int
    expert: int
    probability: float
    gate: List[float]


class TokenAllocationDump(BaseModel):
    task_id: Optional[int] = None
    records: List[TokenAllocation]


class RouterReport(BaseModel):
    """Contents of router_report.json."""
    tau: int
    num_experts: int
    allocation: AllocationMatrix
    row_entropies: List[float]
    mean_entropy: float
    identification_accuracy: float
    diagonally_dominant: bool
    token_dumps: List[TokenAllocationDump] = []
