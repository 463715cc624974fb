# Python standard library imports
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.service.autodiff.tensor import Tensor, zero_grad

logger = logging.getLogger(__name__)


class AdamWSettings(Protocol):
    """Satisfied by TrainHyper and PretrainHyper."""
    betas: Tuple[float, float]
    adam_eps: float
    weight_decay: float


@dataclass
class OptimState:
    """First and second moments aligned with the parameter list, plus the step counter."""
    first_moments: List[np.ndarray] = field(default_factory=list)
    second_moments: List[np.ndarray] = field(default_factory=list)
    step: int = 0


def adamw_step(
    params: Sequence[Tensor],
    grads: Sequence[np.ndarray],
    state: OptimState,
    hyper: AdamWSettings,
    lr_now: float
) -> OptimState:
    """
    One AdamW update with bias correction and decoupled weight decay:
    θ ← θ·(1 − lr·wd) − lr·m̂ / (√v̂ + eps).

    Raises:
        ContractException: If a parameter is frozen, or a gradient or moment shape does not match
    """
    if len(params) != len(grads):
        raise ContractException(f"{len(params)} parameters but {len(grads)} gradients", "adamw_step")
    if not state.first_moments:
        state.first_moments = [np.zeros_like(p.data) for p in params]
        state.second_moments = [np.zeros_like(p.data) for p in params]
    if len(state.first_moments) != len(params):
        raise ContractException("Optimizer state does not match the parameter list", "adamw_step")

    state.step += 1
    beta1, beta2 = hyper.betas
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step
    decay = 1.0 - lr_now * hyper.weight_decay

    for index, (param, grad) in enumerate(zip(params, grads)):
        if not param.requires_grad:
            raise ContractException(f"Frozen tensor {param.name or index} passed to the optimizer", "adamw_step")
        m, v = state.first_moments[index], state.second_moments[index]
        if grad.shape != param.shape or m.shape != param.shape:
            raise ContractException(
                f"Shape mismatch for {param.name or index}: param {param.shape}, grad {grad.shape}, moment {m.shape}",
                "adamw_step"
            )
        m = beta1 * m + (1.0 - beta1) * grad
        v = beta2 * v + (1.0 - beta2) * grad * grad
        state.first_moments[index], state.second_moments[index] = m, v
        m_hat = m / correction1
        v_hat = v / correction2
        param.data = param.data * decay - lr_now * m_hat / (np.sqrt(v_hat) + hyper.adam_eps)
    return state


class AdamWOptimizer:
    """Owns the trainable parameter list and its moments for one training phase."""

    def __init__(self, params: Sequence[Tensor], hyper: AdamWSettings):
        self.params = list(params)
        self.hyper = hyper
        self.state = OptimState()
        self.logger = logging.getLogger(__name__)

    def zero_grad(self) -> None:
        zero_grad(self.params)

    def step(self, lr_now: float) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        adamw_step(self.params, grads, self.state, self.hyper, lr_now)

    @property
    def step_count(self) -> int:
        return self.state.step

    def parameter_count(self) -> int:
        return int(sum(p.size for p in self.params))
