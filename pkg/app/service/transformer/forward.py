# Python standard library imports
import math
from typing import Callable, Optional, Sequence, Union

# Third party imports
import numpy as np

# Application imports
from app.error_handling.exceptions.contract_exception import ContractException
from app.error_handling.exceptions.input_exception import SequenceLengthException
from app.error_handling.exceptions.tensor_index_exception import TensorIndexException
from app.service.autodiff import functional as F
from app.service.autodiff.tensor import Tensor, no_grad
from app.service.transformer.base_transformer import BaseTransformer, LayerWeights

"""
SUMMARY:

Forward pass of the base decoder. Token input is either one sequence
(list / 1-D array, giving [n x ...] outputs) or a right-padded batch
(2-D array, giving [B x n x ...] outputs).

decoder_block_forward takes an optional projection_fn(name, x, weight) that
computes the query and value projections. The base model uses x @ W; adapters
swap in W₀x + ΔWx without touching the rest of the block, so with zero deltas
both paths execute the same operations.
"""

ProjectionFn = Callable[[str, Tensor, Tensor], Tensor]

MASK_VALUE = -1e9


def _as_token_array(tokens: Union[Sequence[int], np.ndarray]) -> np.ndarray:
    array = np.asarray(tokens, dtype=np.int64)
    if array.ndim == 1:
        return array[None, :]
    if array.ndim != 2:
        raise ContractException(f"Token input must be 1-D or 2-D, got rank {array.ndim}", "forward")
    return array


def embed_tokens(tokens: Union[Sequence[int], np.ndarray], model: BaseTransformer) -> Tensor:
    """
    Token embedding plus learned positional embedding per position.

    Raises:
        TensorIndexException: If a token is outside the vocabulary
        SequenceLengthException: If the sequence exceeds max_seq_len
    """
    single = np.asarray(tokens).ndim <= 1
    array = _as_token_array(tokens) if np.asarray(tokens).size else np.zeros((1, 0), dtype=np.int64)
    length = array.shape[1]
    if length > model.config.max_seq_len:
        raise SequenceLengthException(length, model.config.max_seq_len)
    if array.size and (array.min() < 0 or array.max() >= model.config.vocab_size):
        bad = int(array.max() if array.max() >= model.config.vocab_size else array.min())
        raise TensorIndexException("Token id outside the vocabulary", bad, model.config.vocab_size)
    positions = model.position_embedding[0:length]
    h = F.embedding(model.token_embedding, array) + positions
    return h[0] if single else h


def causal_mask(n: int) -> np.ndarray:
    """Lower-triangular boolean matrix: True where query i may attend to key j (j <= i)."""
    return np.tril(np.ones((n, n), dtype=bool))


def _default_projection(_name: str, x: Tensor, weight: Tensor) -> Tensor:
    return x @ weight


def _attention(q: Tensor, k: Tensor, v: Tensor, allowed: np.ndarray, num_heads: int) -> Tensor:
    batch, n, d = q.shape
    head_dim = d // num_heads

    def split(t: Tensor) -> Tensor:
        return t.reshape(batch, n, num_heads, head_dim).transpose(0, 2, 1, 3)

    qh, kh, vh = split(q), split(k), split(v)
    scores = (qh @ kh.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(head_dim))
    scores = F.masked_fill(scores, ~allowed, MASK_VALUE)
    weights = F.softmax(scores, axis=-1)
    return (weights @ vh).transpose(0, 2, 1, 3).reshape(batch, n, d)


def decoder_block_forward(
    h: Tensor,
    layer_weights: LayerWeights,
    causal: np.ndarray,
    num_heads: int,
    projection_fn: Optional[ProjectionFn] = None,
    eps: float = 1e-5
) -> Tensor:
    """
    Pre-norm block: h + Attn(LN(h)), then + MLP(LN(·)).

    Args:
        h: [n x d] or [B x n x d] hidden states
        layer_weights: The block's weights
        causal: [n x n] lower-triangular boolean mask of allowed attention
        num_heads: Attention heads
        projection_fn: Computes the "query" and "value" projections; x @ W when None

    Raises:
        ContractException: If the mask is not lower-triangular or does not match n
    """
    single = h.ndim == 2
    if single:
        h = h.reshape(1, *h.shape)
    n = h.shape[1]
    causal = np.asarray(causal, dtype=bool)
    if causal.shape != (n, n) or np.triu(causal, k=1).any():
        raise ContractException("Attention mask must be an n x n lower-triangular matrix", "decoder_block_forward")
    project = projection_fn or _default_projection
    w = layer_weights

    x = F.layer_norm(h, w.ln1_gamma, w.ln1_beta, eps)
    q = project("query", x, w.w_q)
    k = x @ w.w_k
    v = project("value", x, w.w_v)
    h = h + _attention(q, k, v, causal, num_heads) @ w.w_o

    x = F.layer_norm(h, w.ln2_gamma, w.ln2_beta, eps)
    h = h + F.gelu(x @ w.w_in) @ w.w_out
    return h[0] if single else h


def output_logits(h: Tensor, model: BaseTransformer) -> Tensor:
    """Final norm and the output projection tied to the token embedding."""
    normed = F.layer_norm(h, model.final_gamma, model.final_beta, model.config.ln_eps)
    return normed @ model.token_embedding.T


def base_forward(tokens: Union[Sequence[int], np.ndarray], model: BaseTransformer) -> Tensor:
    """Logits [n x V] for one sequence, [B x n x V] for a padded batch."""
    single = np.asarray(tokens).ndim <= 1
    h = embed_tokens(_as_token_array(tokens), model)
    allowed = causal_mask(h.shape[1])
    for layer in model.layers:
        h = decoder_block_forward(h, layer, allowed, model.config.num_heads, eps=model.config.ln_eps)
    logits = output_logits(h, model)
    return logits[0] if single else logits


class BaseLanguageModel:
    """Adapter-free view of the base model for decoding and evaluation."""

    def __init__(self, model: BaseTransformer):
        self.model = model

    @property
    def max_seq_len(self) -> int:
        return self.model.config.max_seq_len

    def batch_logits(self, tokens: np.ndarray) -> np.ndarray:
        with no_grad():
            return base_forward(np.asarray(tokens), self.model).data
