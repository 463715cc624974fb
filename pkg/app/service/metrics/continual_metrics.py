# Python standard library imports
import logging
from typing import Sequence

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.reports.score_matrix import ScoreMatrix

logger = logging.getLogger(__name__)


def _require_rows(scores: ScoreMatrix, t: int, operation: str) -> None:
    if t < 1 or t > scores.stages:
        raise ContractException(f"Stage {t} is not populated ({scores.stages} stages recorded)", operation)


def compute_op(scores: ScoreMatrix, t: int) -> float:
    """OP_t = (1/t) Σ_{i≤t} R[t][i]."""
    _require_rows(scores, t, "compute_op")
    return float(np.mean(scores.rows[t - 1]))


def compute_bwt(scores: ScoreMatrix, t: int) -> float:
    """BWT_t = (1/t) Σ_{i≤t} (R[t][i] − R[i][i]); the i = t term is zero, and BWT_1 = 0."""
    _require_rows(scores, t, "compute_bwt")
    return float(sum(scores.get(t, i) - scores.get(i, i) for i in range(1, t + 1)) / t)


def compute_general_delta(after: Sequence[float], before: Sequence[float]) -> float:
    """ΔR^G = mean over the probe sets of (after − before)."""
    if len(after) != len(before):
        raise ContractException(
            f"General suites differ in size: {len(after)} after vs {len(before)} before", "compute_general_delta"
        )
    if not after:
        return 0.0
    return float(np.mean(np.asarray(after, dtype=np.float64) - np.asarray(before, dtype=np.float64)))
