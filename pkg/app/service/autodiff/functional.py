# Python standard library imports
import math
from typing import Optional, Sequence, Union

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.dimension_exception import DimensionException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.service.autodiff.tensor import Tensor

_GELU_COEF = math.sqrt(2.0 / math.pi)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; gradient rule d a = g·bᵀ, d b = aᵀ·g."""
    return a.matmul(b)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """
    Softmax along one axis, stabilized by subtracting the slice maximum.

    Raises:
        TensorIndexException: If axis is not a valid axis of x
    """
    if not -x.ndim <= axis < x.ndim:
        raise TensorIndexException(f"Softmax axis {axis} is invalid for rank {x.ndim}", axis, x.ndim)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    exps = np.exp(shifted)
    y = exps / exps.sum(axis=axis, keepdims=True)

    def backward_fn(g: np.ndarray):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return Tensor.from_op(y, (x,), "softmax", backward_fn)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    if not -x.ndim <= axis < x.ndim:
        raise TensorIndexException(f"log_softmax axis {axis} is invalid for rank {x.ndim}", axis, x.ndim)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - log_norm
    probs = np.exp(y)

    def backward_fn(g: np.ndarray):
        return (g - probs * g.sum(axis=axis, keepdims=True),)

    return Tensor.from_op(y, (x,), "log_softmax", backward_fn)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """
    Normalize the last axis to zero mean and unit (population) variance, then
    apply the affine gamma/beta.

    Raises:
        DimensionException: If gamma or beta do not match the normalized dimension
    """
    width = x.shape[-1] if x.ndim else 0
    for label, param in (("gamma", gamma), ("beta", beta)):
        if param.shape != (width,):
            raise DimensionException(f"layer_norm {label} must match the last axis", x.shape, param.shape, "layer_norm")
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(variance + eps)
    x_hat = centered * inv_std
    out = x_hat * gamma.data + beta.data
    g_data = gamma.data

    def backward_fn(g: np.ndarray):
        reduce_axes = tuple(range(g.ndim - 1))
        grad_gamma = (g * x_hat).sum(axis=reduce_axes)
        grad_beta = g.sum(axis=reduce_axes)
        d_hat = g * g_data
        grad_x = inv_std * (
            d_hat
            - d_hat.mean(axis=-1, keepdims=True)
            - x_hat * (d_hat * x_hat).mean(axis=-1, keepdims=True)
        )
        return grad_x, grad_gamma, grad_beta

    return Tensor.from_op(out, (x, gamma, beta), "layer_norm", backward_fn)


def gelu(x: Tensor) -> Tensor:
    """GELU, tanh approximation, with its exact derivative."""
    v = x.data
    inner = _GELU_COEF * (v + 0.044715 * v ** 3)
    t = np.tanh(inner)
    y = 0.5 * v * (1.0 + t)

    def backward_fn(g: np.ndarray):
        d_inner = _GELU_COEF * (1.0 + 3 * 0.044715 * v ** 2)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * d_inner),)

    return Tensor.from_op(y, (x,), "gelu", backward_fn)


def masked_fill(x: Tensor, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where mask is True by a constant; those entries get no gradient."""
    mask = np.asarray(mask, dtype=bool)
    try:
        filled = np.where(mask, value, x.data)
    except ValueError as e:
        raise DimensionException("Mask cannot be broadcast onto tensor", x.shape, mask.shape, "masked_fill") from e
    if filled.shape != x.shape:
        raise DimensionException("Mask would change the tensor shape", x.shape, mask.shape, "masked_fill")
    keep = ~mask

    return Tensor.from_op(filled, (x,), "masked_fill", lambda g: (np.where(keep, g, 0.0),))


def embedding(weight: Tensor, indices: np.ndarray) -> Tensor:
    """Gather rows of weight; the backward pass scatters into the used rows only."""
    indices = np.asarray(indices, dtype=np.int64)
    rows = weight.shape[0]
    if indices.size and (indices.min() < 0 or indices.max() >= rows):
        bad = int(indices.max() if indices.max() >= rows else indices.min())
        raise TensorIndexException("Embedding index out of range", bad, rows)
    shape = weight.shape

    def backward_fn(g: np.ndarray):
        grad = np.zeros(shape, dtype=np.float64)
        np.add.at(grad, indices.reshape(-1), g.reshape(-1, shape[-1]))
        return (grad,)

    return Tensor.from_op(weight.data[indices], (weight,), "embedding", backward_fn)


def cross_entropy(
    logits: Tensor,
    targets: Union[Sequence[int], np.ndarray],
    mask: Optional[np.ndarray] = None
) -> Tensor:
    """
    Mean negative log-likelihood of the targets under softmax(logits).

    Args:
        logits: [..., V] scores
        targets: integer class per leading position, shape logits.shape[:-1]
        mask: optional 0/1 weights per position; the mean runs over the weighted positions only

    Raises:
        TensorIndexException: If a target is outside [0, V)
        DimensionException: If targets or mask do not match the leading shape
        ContractException: If no position is counted
    """
    vocab = logits.shape[-1]
    lead_shape = logits.shape[:-1]
    targets = np.asarray(targets, dtype=np.int64)
    if targets.shape != lead_shape:
        raise DimensionException("Targets must match the leading logits shape", lead_shape, targets.shape, "cross_entropy")
    if targets.size and (targets.min() < 0 or targets.max() >= vocab):
        bad = int(targets.max() if targets.max() >= vocab else targets.min())
        raise TensorIndexException("Cross-entropy target outside the vocabulary", bad, vocab)
    weights = np.ones(lead_shape, dtype=np.float64) if mask is None else np.asarray(mask, dtype=np.float64)
    if weights.shape != lead_shape:
        raise DimensionException("Mask must match the leading logits shape", lead_shape, weights.shape, "cross_entropy")
    denom = weights.sum()
    if denom <= 0:
        raise ContractException("cross_entropy needs at least one counted position", "cross_entropy")

    flat_logits = logits.data.reshape(-1, vocab)
    flat_targets = targets.reshape(-1)
    flat_weights = weights.reshape(-1)
    shifted = flat_logits - flat_logits.max(axis=-1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    rows = np.arange(flat_targets.size)
    loss = -(flat_weights * log_probs[rows, flat_targets]).sum() / denom

    def backward_fn(g: np.ndarray):
        grad = np.exp(log_probs)
        grad[rows, flat_targets] -= 1.0
        grad *= (flat_weights / denom)[:, None] * g
        return (grad.reshape(logits.shape),)

    return Tensor.from_op(np.asarray(loss), (logits,), "cross_entropy", backward_fn)
