# Third party imports
import numpy as np
import pytest

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.models.config.train_hyper import TrainHyper
from app.service.autodiff.tensor import Tensor
from app.service.training.optimizer import AdamWOptimizer, OptimState, adamw_step
from app.service.training.schedule import cosine_lr


def _param(value) -> Tensor:
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True)


def test_decay_only_step():
    param = _param([2.0, -4.0])
    hyper = TrainHyper(weight_decay=0.1)
    adamw_step([param], [np.zeros(2)], OptimState(), hyper, lr_now=0.5)
    assert np.allclose(param.data, np.array([2.0, -4.0]) * (1 - 0.5 * 0.1), rtol=0, atol=1e-15)


def test_first_step_matches_hand_arithmetic():
    param = _param([1.0])
    hyper = TrainHyper(weight_decay=0.0, betas=(0.9, 0.999))
    state = adamw_step([param], [np.array([0.5])], OptimState(), hyper, lr_now=0.1)
    m, v = 0.1 * 0.5, 0.001 * 0.25
    m_hat, v_hat = m / (1 - 0.9), v / (1 - 0.999)
    assert state.step == 1
    assert state.first_moments[0][0] == pytest.approx(m)
    assert param.data[0] == pytest.approx(1.0 - 0.1 * m_hat / (np.sqrt(v_hat) + 1e-8), abs=1e-15)


def test_constant_gradient_steps_approach_lr():
    param = _param([0.0])
    optimizer = AdamWOptimizer([param], TrainHyper(weight_decay=0.0))
    previous = 0.0
    for _ in range(50):
        param.grad = np.array([3.0])
        optimizer.step(0.01)
        step_size, previous = previous - param.data[0], param.data[0]
    assert step_size == pytest.approx(0.01, rel=1e-6)
    assert optimizer.step_count == 50


def test_frozen_parameter_rejected():
    with pytest.raises(ContractException):
        adamw_step([Tensor([1.0])], [np.zeros(1)], OptimState(), TrainHyper(), 0.1)


def test_gradient_shape_checked():
    with pytest.raises(ContractException):
        adamw_step([_param([1.0, 2.0])], [np.zeros(3)], OptimState(), TrainHyper(), 0.1)


@pytest.mark.parametrize(
    "step, expected",
    [(0, 1e-3), (100, 0.0), (50, 5e-4)]
)
def test_cosine_schedule(step, expected):
    assert cosine_lr(step, 100, 1e-3) == pytest.approx(expected, abs=1e-15)


def test_cosine_schedule_is_monotone_and_clamped():
    values = [cosine_lr(s, 10, 1.0) for s in range(-2, 14)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[0] == 1.0 and values[-1] == 0.0
