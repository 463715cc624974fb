# Third party imports
import pytest

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.reports.score_matrix import ScoreMatrix
from app.service.metrics.continual_metrics import compute_bwt, compute_general_delta, compute_op


@pytest.fixture
def scores() -> ScoreMatrix:
    return ScoreMatrix(task_names=["copy", "reverse", "sort"], rows=[[90.0], [70.0, 80.0], [60.0, 75.0, 100.0]])


def test_op(scores):
    assert compute_op(scores, 1) == 90.0
    assert compute_op(scores, 2) == 75.0
    assert compute_op(scores, 3) == pytest.approx(235.0 / 3)


def test_bwt(scores):
    assert compute_bwt(scores, 1) == 0.0
    assert compute_bwt(scores, 2) == pytest.approx(-10.0)
    # (60 - 90) + (75 - 80) + 0
    assert compute_bwt(scores, 3) == pytest.approx(-35.0 / 3)


def test_no_forgetting_gives_zero_bwt():
    perfect = ScoreMatrix(task_names=["a", "b"], rows=[[100.0], [100.0, 100.0]])
    assert compute_bwt(perfect, 2) == 0.0


def test_unpopulated_stage_rejected(scores):
    with pytest.raises(ContractException):
        compute_op(scores, 4)
    with pytest.raises(ContractException):
        compute_bwt(scores, 0)


def test_general_delta():
    assert compute_general_delta([50.0, 40.0], [60.0, 40.0]) == pytest.approx(-5.0)
    assert compute_general_delta([], []) == 0.0
    with pytest.raises(ContractException):
        compute_general_delta([1.0], [1.0, 2.0])
