# Python standard library imports
import logging
from typing import Callable, Optional, Sequence, Union

# Third party imports
import numpy as np

# Application imports
from app.service.autodiff.tensor import Tensor, backward, no_grad

logger = logging.getLogger(__name__)


def _probe_indices(size: int, limit: Optional[int]) -> np.ndarray:
    if limit is None or size <= limit:
        return np.arange(size)
    return np.unique(np.linspace(0, size - 1, limit).round().astype(np.int64))


def finite_diff_check(
    f: Callable[[], Tensor],
    x: Union[Tensor, Sequence[Tensor]],
    step: float = 1e-5,
    floor: float = 1e-8,
    max_entries_per_tensor: Optional[int] = None
) -> float:
    """
    Compare backward gradients against central finite differences.

    Args:
        f: Zero-argument closure returning a scalar tensor that depends on x
        x: The tensor(s) to differentiate with respect to; must require grad
        step: Central difference half-width
        floor: Lower bound on the relative-error denominator max(|a|, |b|, floor)
        max_entries_per_tensor: Probe an evenly spaced subset of entries when set

    Returns:
        float: The worst relative error over every probed entry
    """
    params = [x] if isinstance(x, Tensor) else list(x)
    for param in params:
        param.grad = None
    backward(f(), params=params)
    analytic = [p.grad.copy() if p.grad is not None else np.zeros_like(p.data) for p in params]

    worst = 0.0
    with no_grad():
        for param, grad in zip(params, analytic):
            flat = param.data.reshape(-1)
            flat_grad = grad.reshape(-1)
            for i in _probe_indices(flat.size, max_entries_per_tensor):
                original = flat[i]
                flat[i] = original + step
                f_plus = f().item()
                flat[i] = original - step
                f_minus = f().item()
                flat[i] = original
                numeric = (f_plus - f_minus) / (2.0 * step)
                denom = max(abs(flat_grad[i]), abs(numeric), floor)
                worst = max(worst, abs(flat_grad[i] - numeric) / denom)
    logger.debug("Finite-difference check over %d tensors: worst relative error %.3e", len(params), worst)
    return worst
